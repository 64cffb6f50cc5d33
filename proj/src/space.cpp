#include "jumpconv/space.hpp"

#include <algorithm>
#include <cmath>

#include "jumpconv/errors.hpp"

namespace jumpconv {
namespace {

double ipow(double y, int n) noexcept {
  double out = 1.0;
  for (int i = 0; i < n; ++i) out *= y;
  return out;
}

// y^s for y >= 0, exact small-integer path.
double powr(double y, double s) noexcept {
  if (s == 2.0) return y * y;
  if (s == 1.0) return y;
  if (s == 0.0) return 1.0;
  return std::pow(y, s);
}

void check_dim(const SmoothSpace& sp, const Point& x, const char* what) {
  if (static_cast<std::size_t>(x.size()) != sp.dim())
    throw DomainError(std::string(what) + ": dimension mismatch");
}

// Dual map of l^s: the unit vector of l^(s') that attains <psi(y), y> = |y|_s.
Point duality_map(const Point& y, double s) {
  const double n = lp_norm(y, s);
  Point out = Point::Zero(y.size());
  if (n == 0.0) return out;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double a = std::abs(y[i]) / n;
    out[i] = std::copysign(powr(a, s - 1.0), y[i]);
  }
  return out;
}

}  // namespace

SmoothSpace::SmoothSpace(std::size_t d, double r, double q, double p) : d_(d), r_(r), q_(q), p_(p), r_int_(0) {
  if (d_ < 1) throw DomainError("SmoothSpace: d must be >= 1");
  if (!(r_ >= 2.0) || !std::isfinite(r_)) throw DomainError("SmoothSpace: r must be in [2, inf)");
  if (!(q_ >= 2.0) || !std::isfinite(q_)) throw DomainError("SmoothSpace: q must be >= 2");
  if (!(p_ > 1.0 && p_ <= 2.0)) throw DomainError("SmoothSpace: p must be in (1, 2]");
  if (!(q_ >= p_)) throw DomainError("SmoothSpace: q must be >= p");
  if (r_ == std::floor(r_) && r_ <= 16.0) r_int_ = static_cast<int>(r_);
}

double SmoothSpace::power_sum(const Point& x) const noexcept {
  double s = 0.0;
  if (r_int_ != 0) {
    for (Eigen::Index i = 0; i < x.size(); ++i) s += ipow(std::abs(x[i]), r_int_);
  } else {
    for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x[i]), r_);
  }
  return s;
}

double SmoothSpace::norm_from_power_sum(double s) const noexcept {
  if (r_ == 2.0) return std::sqrt(s);
  return std::pow(s, 1.0 / r_);
}

double lp_norm(const Point& x, double s) {
  const double m = x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
  if (m == 0.0 || !std::isfinite(m)) return m;
  if (std::isinf(s)) return m;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += powr(std::abs(x[i]) / m, s);
  if (s == 2.0) return m * std::sqrt(acc);
  if (s == 1.0) return m * acc;
  return m * std::pow(acc, 1.0 / s);
}

double norm(const SmoothSpace& sp, const Point& x) {
  check_dim(sp, x, "norm");
  return lp_norm(x, sp.r());
}

double phi(const SmoothSpace& sp, const Point& x) { return powr(norm(sp, x), sp.q()); }

Point phi_gradient(const SmoothSpace& sp, const Point& x) {
  check_dim(sp, x, "phi_grad");
  const double n = norm(sp, x);
  Point g = Point::Zero(x.size());
  if (n == 0.0) return g;
  // q |x|^(q-r) |x_i|^(r-1) sgn(x_i) = q |x|^(q-1) (|x_i| / |x|)^(r-1) sgn(x_i)
  const double lead = sp.q() * powr(n, sp.q() - 1.0);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    g[i] = std::copysign(lead * powr(std::abs(x[i]) / n, sp.r() - 1.0), x[i]);
  return g;
}

double phi_grad(const SmoothSpace& sp, const Point& x, const Point& h) {
  check_dim(sp, h, "phi_grad");
  return phi_gradient(sp, x).dot(h);
}

Matrix phi_hessian(const SmoothSpace& sp, const Point& x) {
  check_dim(sp, x, "phi_hess");
  const auto d = static_cast<Eigen::Index>(sp.dim());
  const double n = norm(sp, x);
  const double q = sp.q();
  const double r = sp.r();
  if (n == 0.0) {
    if (q == 2.0 && r == 2.0) return 2.0 * Matrix::Identity(d, d);
    return Matrix::Zero(d, d);
  }
  // H = q |x|^(q-2) [ (q - r) w w^T + (r - 1) diag(y^(r-2)) ],
  // y_i = |x_i| / |x|,  w_i = sgn(x_i) y_i^(r-1).
  Point w(d);
  Point diag(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double y = std::abs(x[i]) / n;
    w[i] = std::copysign(powr(y, r - 1.0), x[i]);
    diag[i] = (r - 1.0) * powr(y, r - 2.0);
  }
  Matrix h = (q - r) * (w * w.transpose());
  h.diagonal() += diag;
  return q * powr(n, q - 2.0) * h;
}

double phi_hess(const SmoothSpace& sp, const Point& x, const Point& h, const Point& k) {
  check_dim(sp, h, "phi_hess");
  check_dim(sp, k, "phi_hess");
  return h.dot(phi_hessian(sp, x) * k);
}

double bilinear_norm(const SmoothSpace& sp, const Matrix& h, Rng& rng, int starts) {
  if (sp.r() == 2.0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  const double r = sp.r();
  const double rd = sp.dual_r();
  const auto d = h.rows();
  double best = 0.0;
  auto run = [&](Point x) {
    x /= lp_norm(x, r);
    double value = 0.0;
    for (int it = 0; it < 200; ++it) {
      const Point hx = h * x;
      const double next = lp_norm(hx, rd);
      // x <- psi_{r'}(H psi_{r'}(H x)): monotone ascent for r >= r'.
      Point y = duality_map(h.transpose() * duality_map(hx, rd), rd);
      if (lp_norm(y, r) == 0.0) break;
      x = y / lp_norm(y, r);
      if (std::abs(next - value) <= 1e-14 * std::max(1.0, next)) {
        value = next;
        break;
      }
      value = next;
    }
    best = std::max(best, std::max(value, lp_norm(h * x, rd)));
  };
  for (Eigen::Index i = 0; i < d; ++i) run(Point::Unit(d, i));
  run(Point::Ones(d));
  for (int s = 0; s < starts; ++s) {
    Point x(d);
    for (Eigen::Index i = 0; i < d; ++i) x[i] = rng.normal();
    run(x);
  }
  return best;
}

Point random_unit_point(const SmoothSpace& sp, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(sp.dim());
  Point x(d);
  do {
    for (Eigen::Index i = 0; i < d; ++i) x[i] = rng.normal();
  } while (x.cwiseAbs().maxCoeff() == 0.0);
  return x / norm(sp, x);
}

SmoothnessConstants estimate_smoothness_constants(const SmoothSpace& sp, std::size_t n_samples,
                                                  std::uint64_t seed) {
  if (n_samples < 1000) throw DomainError("estimate_smoothness_constants: n_samples must be >= 1000");
  Rng rng(seed);
  SmoothnessConstants out{0.0, 0.0};
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Point x = random_unit_point(sp, rng);
    const double nx = norm(sp, x);
    const double g = lp_norm(phi_gradient(sp, x), sp.dual_r()) / std::pow(nx, sp.q() - 1.0);
    out.k1 = std::max(out.k1, g);
    // The Hessian bound is checked on a thinner subsample; it costs a power iteration.
    if (sp.r() == 2.0 || i % 16 == 0) {
      const double hn = bilinear_norm(sp, phi_hessian(sp, x), rng, 2) / std::pow(nx, sp.q() - 2.0);
      out.k2 = std::max(out.k2, hn);
    }
  }
  return out;
}

double MartingaleEnsemble::max_mean_zscore() const {
  double worst = 0.0;
  if (n_paths < 2) return worst;
  for (std::size_t n = 0; n < n_steps; ++n) {
    for (std::size_t c = 0; c < dim; ++c) {
      double s = 0.0, s2 = 0.0;
      for (std::size_t m = 0; m < n_paths; ++m) {
        const double v = increment(m, n)[static_cast<Eigen::Index>(c)];
        s += v;
        s2 += v * v;
      }
      const double mean = s / static_cast<double>(n_paths);
      const double var = (s2 - s * mean) / static_cast<double>(n_paths - 1);
      if (var > 0.0) worst = std::max(worst, std::abs(mean) / std::sqrt(var / static_cast<double>(n_paths)));
    }
  }
  return worst;
}

MartingaleEnsemble rademacher_ensemble(std::size_t dim, std::size_t n_paths, std::size_t n_steps, Rng& rng) {
  MartingaleEnsemble e{n_paths, n_steps, dim, "rademacher", {}};
  e.increments.reserve(n_paths * n_steps);
  for (std::size_t i = 0; i < n_paths * n_steps; ++i) {
    Point x(static_cast<Eigen::Index>(dim));
    for (std::size_t c = 0; c < dim; ++c) x[static_cast<Eigen::Index>(c)] = (rng.next_u64() >> 63) ? 1.0 : -1.0;
    e.increments.push_back(std::move(x));
  }
  return e;
}

MartingaleEnsemble gaussian_ensemble(std::size_t dim, std::size_t n_paths, std::size_t n_steps, Rng& rng,
                                     double scale) {
  MartingaleEnsemble e{n_paths, n_steps, dim, "gaussian", {}};
  e.increments.reserve(n_paths * n_steps);
  for (std::size_t i = 0; i < n_paths * n_steps; ++i) {
    Point x(static_cast<Eigen::Index>(dim));
    for (std::size_t c = 0; c < dim; ++c) x[static_cast<Eigen::Index>(c)] = scale * rng.normal();
    e.increments.push_back(std::move(x));
  }
  return e;
}

double estimate_mtype_constant(const SmoothSpace& sp, double p, const MartingaleEnsemble& ensemble) {
  if (!(p > 0.0)) throw DomainError("estimate_mtype_constant: p must be > 0");
  if (ensemble.dim != sp.dim()) throw DomainError("estimate_mtype_constant: dimension mismatch");
  if (ensemble.n_paths == 0 || ensemble.n_steps == 0) return 0.0;
  const auto m_paths = static_cast<double>(ensemble.n_paths);
  std::vector<double> moment(ensemble.n_steps, 0.0);
  double increments = 0.0;
  for (std::size_t m = 0; m < ensemble.n_paths; ++m) {
    Point sum = Point::Zero(static_cast<Eigen::Index>(ensemble.dim));
    for (std::size_t n = 0; n < ensemble.n_steps; ++n) {
      const Point& dm = ensemble.increment(m, n);
      sum += dm;
      moment[n] += std::pow(norm(sp, sum), p);
      increments += std::pow(norm(sp, dm), p);
    }
  }
  if (increments == 0.0) return 0.0;
  const double top = *std::max_element(moment.begin(), moment.end()) / m_paths;
  return top / (increments / m_paths);
}

}  // namespace jumpconv
