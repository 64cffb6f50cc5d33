#pragma once

// Contraction C0-semigroups S(t) = exp(tA) on R^d: action, resolvent
// R(lambda, A) = (lambda I - A)^{-1}, the Yosida family, and sampled
// certificates of contraction and phi-dissipativity for a given l^r norm.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "jumpconv/space.hpp"

namespace jumpconv {

/// exp(a) by scaling and squaring with the degree-13 Pade approximant
/// (Higham 2005, "The scaling and squaring method for the matrix exponential
/// revisited").
Matrix expm_pade13(const Matrix& a);

class Generator {
 public:
  enum class Kind { identity, diagonal, dirichlet_laplacian, dense };

  /// A = 0, S(t) = I.
  static Generator identity(std::size_t d);
  /// A = diag(rates), every rate <= 0.
  static Generator diagonal(std::vector<double> rates);
  /// A = scale * tridiag(1, -2, 1) with Dirichlet ends; scale > 0.
  static Generator dirichlet_laplacian(std::size_t d, double scale);
  /// Arbitrary square matrix. Contraction is not assumed; certify it.
  static Generator dense(Matrix a);

  Kind kind() const noexcept { return kind_; }
  std::string kind_name() const;
  std::size_t dim() const noexcept { return static_cast<std::size_t>(a_.rows()); }
  const Matrix& matrix() const noexcept { return a_; }

  /// A x.
  Point generate(const Point& x) const { return a_ * x; }
  /// S(t) as a matrix. Closed-form spectral evaluation for identity,
  /// diagonal and Laplacian kinds; Pade-13 for dense.
  Matrix propagator(double t) const;
  /// S(t) x.
  Point apply(double t, const Point& x) const;
  /// R(lambda, A) as a matrix.
  Matrix resolvent_matrix(double lambda) const;

  /// Orthonormal eigenbasis and eigenvalues when A is symmetric with a
  /// closed form (identity, diagonal, Laplacian).
  bool has_closed_form_spectrum() const noexcept { return kind_ != Kind::dense; }
  const Point& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenvectors() const { return eigenvectors_; }

 private:
  Generator(Kind kind, Matrix a);
  Kind kind_;
  Matrix a_;
  Point eigenvalues_;
  Matrix eigenvectors_;
};

/// y solving (lambda I - A) y = x; lambda > 0.
Point resolvent(const Generator& gen, double lambda, const Point& x);
/// n R(n, A) x; n > 0.
Point yosida_scale(const Generator& gen, double n, const Point& x);
/// A_lambda x = lambda (lambda R(lambda, A) - I) x; lambda > 0.
Point yosida_operator(const Generator& gen, double lambda, const Point& x);

/// Default certification grid used before any Monte Carlo experiment.
std::vector<double> default_certification_times();

inline constexpr double contraction_tolerance = 1e-10;

/// max over t_grid x sampled unit vectors of |S(t) x| / |x|.
double check_contraction(const Generator& gen, const SmoothSpace& sp, const std::vector<double>& t_grid,
                         std::size_t n_sphere, std::uint64_t seed = 0xc0417ac7);

inline bool certified_contraction(double max_ratio) { return max_ratio <= 1.0 + contraction_tolerance; }

/// max over sampled unit x of phi'(x)(A x).
double check_dissipativity_phi(const Generator& gen, const SmoothSpace& sp, std::size_t n_samples,
                               std::uint64_t seed = 0xd155);

}  // namespace jumpconv
