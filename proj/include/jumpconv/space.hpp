#pragma once

// Finite-dimensional l^r(d) surrogate of an M-type p Banach space with the
// smooth functional phi(x) = |x|^q, its first and second derivatives, and
// sampled estimates of the derivative bound constants k1, k2 and of the
// martingale-type constant K_p.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "jumpconv/rng.hpp"

namespace jumpconv {

using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class SmoothSpace {
 public:
  /// Requires d >= 1, r >= 2, q >= 2, 1 < p <= 2, q >= p.
  SmoothSpace(std::size_t d, double r, double q, double p);

  std::size_t dim() const noexcept { return d_; }
  double r() const noexcept { return r_; }
  double q() const noexcept { return q_; }
  double p() const noexcept { return p_; }
  /// Conjugate exponent r / (r - 1).
  double dual_r() const noexcept { return r_ / (r_ - 1.0); }

  SmoothSpace with_p(double p) const { return SmoothSpace(d_, r_, q_, p); }
  SmoothSpace with_q(double q) const { return SmoothSpace(d_, r_, q, p_); }

  /// sum |x_i|^r, unscaled. Cheap monotone surrogate of the norm used by
  /// hot loops that only need a running maximum.
  double power_sum(const Point& x) const noexcept;
  /// Inverse of power_sum on norms: (s)^(1/r).
  double norm_from_power_sum(double s) const noexcept;

 private:
  std::size_t d_;
  double r_, q_, p_;
  int r_int_;  // r when it is a small integer, else 0
};

/// (sum |x_i|^r)^(1/r), evaluated with max-scaling so powers of two scale exactly.
double norm(const SmoothSpace& sp, const Point& x);
/// l^s norm for an arbitrary exponent s >= 1.
double lp_norm(const Point& x, double s);

/// |x|^q.
double phi(const SmoothSpace& sp, const Point& x);
/// Covector g with phi'(x)(h) = <g, h>.
Point phi_gradient(const SmoothSpace& sp, const Point& x);
/// phi'(x)(h).
double phi_grad(const SmoothSpace& sp, const Point& x, const Point& h);
/// Matrix H with phi''(x)(h, k) = h^T H k.
Matrix phi_hessian(const SmoothSpace& sp, const Point& x);
/// phi''(x)(h, k).
double phi_hess(const SmoothSpace& sp, const Point& x, const Point& h, const Point& k);

/// Operator norm of a symmetric matrix seen as a bilinear form on l^r x l^r,
/// i.e. sup |h^T H k| over unit h, k. Exact for r = 2; for r > 2 a
/// multi-start nonlinear power iteration (a lower bound that is tight in
/// practice for the small matrices used here).
double bilinear_norm(const SmoothSpace& sp, const Matrix& h, Rng& rng, int starts = 8);

/// Uniformly random direction normalised to the unit l^r sphere.
Point random_unit_point(const SmoothSpace& sp, Rng& rng);

struct SmoothnessConstants {
  double k1;
  double k2;
};

/// k1 = max |phi'(x)|_* / |x|^(q-1), k2 = max |phi''(x)| / |x|^(q-2) over
/// n_samples points of the unit sphere (both ratios are 0-homogeneous).
SmoothnessConstants estimate_smoothness_constants(const SmoothSpace& sp, std::size_t n_samples,
                                                  std::uint64_t seed = 0x5eed);

/// M paths of N independent mean-zero increments.
struct MartingaleEnsemble {
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  std::size_t dim = 0;
  std::string law;
  std::vector<Point> increments;  // path-major: increments[m * n_steps + n]

  const Point& increment(std::size_t path, std::size_t step) const { return increments[path * n_steps + step]; }
  /// Largest |per-step sample mean| measured in standard errors, over steps and coordinates.
  double max_mean_zscore() const;
};

MartingaleEnsemble rademacher_ensemble(std::size_t dim, std::size_t n_paths, std::size_t n_steps, Rng& rng);
MartingaleEnsemble gaussian_ensemble(std::size_t dim, std::size_t n_paths, std::size_t n_steps, Rng& rng,
                                     double scale = 1.0);

/// max_n E|M_n|^p / sum_n E|M_n - M_{n-1}|^p, a lower bound for K_p(E).
/// A degenerate (all-zero) ensemble gives 0.
double estimate_mtype_constant(const SmoothSpace& sp, double p, const MartingaleEnsemble& ensemble);

}  // namespace jumpconv
