#include "jumpconv/integrand.hpp"

#include <algorithm>
#include <cmath>

#include "jumpconv/errors.hpp"
#include "jumpconv/quadrature.hpp"

namespace jumpconv {
namespace {

Point horner(const Matrix& c, double t) {
  Point acc = c.col(c.cols() - 1);
  for (Eigen::Index j = c.cols() - 2; j >= 0; --j) acc = acc * t + c.col(j);
  return acc;
}

}  // namespace

FieldIntegrand FieldIntegrand::zero(std::size_t dim, std::size_t n_marks) {
  std::vector<Point> values(n_marks, Point::Zero(static_cast<Eigen::Index>(dim)));
  FieldIntegrand f = constant(std::move(values));
  f.zero_ = true;
  return f;
}

FieldIntegrand FieldIntegrand::constant(std::vector<Point> per_mark) {
  std::vector<Matrix> coeffs;
  coeffs.reserve(per_mark.size());
  for (auto& v : per_mark) coeffs.emplace_back(v);
  return polynomial(std::move(coeffs));
}

FieldIntegrand FieldIntegrand::polynomial(std::vector<Matrix> coefficients) {
  if (coefficients.empty()) throw DomainError("FieldIntegrand: at least one mark is required");
  const auto d = coefficients.front().rows();
  Eigen::Index deg = 0;
  bool zero = true;
  for (const auto& c : coefficients) {
    if (c.rows() != d || c.rows() < 1 || c.cols() < 1) throw DomainError("FieldIntegrand: inconsistent coefficient shapes");
    if (!c.allFinite()) throw DomainError("FieldIntegrand: coefficients must be finite");
    deg = std::max(deg, c.cols());
    zero = zero && c.isZero(0.0);
  }
  for (auto& c : coefficients) {
    if (c.cols() < deg) {
      Matrix padded = Matrix::Zero(d, deg);
      padded.leftCols(c.cols()) = c;
      c = std::move(padded);
    }
  }
  FieldIntegrand f;
  f.dim_ = static_cast<std::size_t>(d);
  f.n_marks_ = coefficients.size();
  f.zero_ = zero;
  f.poly_ = std::move(coefficients);
  return f;
}

FieldIntegrand FieldIntegrand::from_rule(std::size_t dim, std::size_t n_marks, Rule eval, Rule antiderivative) {
  if (dim < 1 || n_marks < 1) throw DomainError("FieldIntegrand: dim and n_marks must be >= 1");
  if (!eval) throw DomainError("FieldIntegrand: empty evaluation rule");
  FieldIntegrand f;
  f.dim_ = dim;
  f.n_marks_ = n_marks;
  f.eval_ = std::move(eval);
  f.anti_ = std::move(antiderivative);
  return f;
}

Point FieldIntegrand::operator()(double t, std::size_t mark) const {
  if (mark >= n_marks_) throw DomainError("FieldIntegrand: mark index out of range");
  if (poly_) return horner((*poly_)[mark], t);
  return eval_(t, mark);
}

Point FieldIntegrand::antiderivative(double t, std::size_t mark) const {
  if (mark >= n_marks_) throw DomainError("FieldIntegrand: mark index out of range");
  if (poly_) {
    const Matrix& c = (*poly_)[mark];
    Matrix integrated(c.rows(), c.cols() + 1);
    integrated.col(0).setZero();
    for (Eigen::Index j = 0; j < c.cols(); ++j) integrated.col(j + 1) = c.col(j) / static_cast<double>(j + 1);
    return horner(integrated, t);
  }
  if (!anti_) throw DomainError("FieldIntegrand: no antiderivative available");
  return anti_(t, mark);
}

Point FieldIntegrand::drift(const MarkSpace& ms, double t) const {
  if (ms.size() != n_marks_) throw DomainError("FieldIntegrand: mark space mismatch");
  Point m = Point::Zero(static_cast<Eigen::Index>(dim_));
  for (std::size_t k = 0; k < n_marks_; ++k) m += ms.weight(k) * (*this)(t, k);
  return m;
}

Matrix FieldIntegrand::drift_coefficients(const MarkSpace& ms) const {
  if (!poly_) throw DomainError("FieldIntegrand: drift coefficients need a polynomial integrand");
  if (ms.size() != n_marks_) throw DomainError("FieldIntegrand: mark space mismatch");
  Matrix m = Matrix::Zero((*poly_)[0].rows(), (*poly_)[0].cols());
  for (std::size_t k = 0; k < n_marks_; ++k) m += ms.weight(k) * (*poly_)[k];
  return m;
}

FieldIntegrand FieldIntegrand::mapped(const Matrix& l) const {
  if (static_cast<std::size_t>(l.cols()) != dim_) throw DomainError("FieldIntegrand: map dimension mismatch");
  if (poly_) {
    std::vector<Matrix> coeffs;
    for (const auto& c : *poly_) coeffs.emplace_back(l * c);
    return polynomial(std::move(coeffs));
  }
  auto eval = [inner = eval_, l](double t, std::size_t k) -> Point { return l * inner(t, k); };
  Rule anti;
  if (anti_) anti = [inner = anti_, l](double t, std::size_t k) -> Point { return l * inner(t, k); };
  auto f = from_rule(static_cast<std::size_t>(l.rows()), n_marks_, std::move(eval), std::move(anti));
  f.breaks_ = breaks_;
  return f;
}

FieldIntegrand FieldIntegrand::scaled(double c) const {
  if (poly_) {
    std::vector<Matrix> coeffs;
    for (const auto& m : *poly_) coeffs.emplace_back(c * m);
    return polynomial(std::move(coeffs));
  }
  auto eval = [inner = eval_, c](double t, std::size_t k) -> Point { return c * inner(t, k); };
  Rule anti;
  if (anti_) anti = [inner = anti_, c](double t, std::size_t k) -> Point { return c * inner(t, k); };
  auto f = from_rule(dim_, n_marks_, std::move(eval), std::move(anti));
  f.breaks_ = breaks_;
  return f;
}

FieldIntegrand FieldIntegrand::without_antiderivative() const {
  if (poly_) {
    auto coeffs = *poly_;
    return from_rule(dim_, n_marks_, [coeffs](double t, std::size_t k) { return horner(coeffs[k], t); });
  }
  auto f = from_rule(dim_, n_marks_, eval_);
  f.breaks_ = breaks_;
  return f;
}

ScalarRule norm_power_rule(const SmoothSpace& sp, const FieldIntegrand& xi, double power) {
  ScalarRule g;
  g.eval = [sp, xi, power](double t, std::size_t k) { return std::pow(norm(sp, xi(t, k)), power); };
  g.breaks = xi.breaks();
  // Constant-in-time fields integrate exactly.
  if (const auto* c = xi.polynomial_coefficients(); c && (*c)[0].cols() == 1) {
    g.antiderivative = [sp, xi, power](double t, std::size_t k) {
      return t * std::pow(norm(sp, xi(0.0, k)), power);
    };
  }
  return g;
}

StepIntegrand::StepIntegrand(std::vector<double> breakpoints, std::vector<std::vector<StepCell>> cells,
                             AdaptedRule adapted)
    : breakpoints_(std::move(breakpoints)), cells_(std::move(cells)), adapted_(std::move(adapted)) {
  if (breakpoints_.size() < 2 || breakpoints_.front() != 0.0)
    throw DomainError("StepIntegrand: breakpoints must start at 0 and contain >= 2 points");
  for (std::size_t j = 1; j < breakpoints_.size(); ++j)
    if (!(breakpoints_[j] > breakpoints_[j - 1])) throw DomainError("StepIntegrand: breakpoints must increase");
  if (cells_.size() != breakpoints_.size() - 1) throw DomainError("StepIntegrand: one cell list per interval");
  bool have_dim = false;
  for (const auto& interval : cells_) {
    for (std::size_t a = 0; a < interval.size(); ++a) {
      const auto& c = interval[a];
      if (!have_dim) {
        dim_ = static_cast<std::size_t>(c.coefficient.size());
        have_dim = true;
      }
      if (static_cast<std::size_t>(c.coefficient.size()) != dim_) throw DomainError("StepIntegrand: dimension mismatch");
      if (!c.coefficient.allFinite()) throw DomainError("StepIntegrand: coefficients must be finite");
      for (std::size_t b = a + 1; b < interval.size(); ++b)
        if (!c.cell.disjoint(interval[b].cell)) throw DomainError("StepIntegrand: cells must be disjoint");
    }
  }
  if (!have_dim) throw DomainError("StepIntegrand: no cells");
}

StepIntegrand StepIntegrand::resolve(const PoissonPath& path) const {
  if (!adapted_) return *this;
  auto cells = cells_;
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const auto prefix = path.prefix(breakpoints_[j]);
    for (std::size_t k = 0; k < cells[j].size(); ++k) {
      cells[j][k].coefficient = adapted_(prefix, j, k);
      if (static_cast<std::size_t>(cells[j][k].coefficient.size()) != dim_)
        throw DomainError("StepIntegrand: adapted rule returned a wrong dimension");
    }
  }
  return StepIntegrand(breakpoints_, std::move(cells));
}

FieldIntegrand StepIntegrand::as_field(std::size_t n_marks) const {
  if (adapted_) throw DomainError("StepIntegrand: resolve adapted coefficients before as_field");
  const auto d = static_cast<Eigen::Index>(dim_);
  // value[j][k]: coefficient on interval j for mark k.
  std::vector<std::vector<Point>> value(cells_.size(), std::vector<Point>(n_marks, Point::Zero(d)));
  for (std::size_t j = 0; j < cells_.size(); ++j)
    for (const auto& c : cells_[j])
      for (std::size_t k = 0; k < n_marks; ++k)
        if (c.cell.contains(k)) value[j][k] = c.coefficient;
  auto bp = breakpoints_;
  // Interval (t_j, t_{j+1}] containing t, or npos outside [0, t_n]. At
  // t = 0 the right limit is used so quadrature sees no spurious zero.
  auto locate = [bp](double t) -> std::size_t {
    if (t == bp.front()) return 0;
    if (!(t > bp.front()) || t > bp.back()) return static_cast<std::size_t>(-1);
    const auto it = std::lower_bound(bp.begin(), bp.end(), t);
    return static_cast<std::size_t>(it - bp.begin()) - 1;
  };
  auto eval = [value, locate, d](double t, std::size_t k) -> Point {
    const auto j = locate(t);
    if (j == static_cast<std::size_t>(-1)) return Point::Zero(d);
    return value[j][k];
  };
  auto anti = [value, bp, d](double t, std::size_t k) -> Point {
    Point acc = Point::Zero(d);
    for (std::size_t j = 0; j + 1 < bp.size(); ++j) {
      if (t <= bp[j]) break;
      acc += (std::min(t, bp[j + 1]) - bp[j]) * value[j][k];
    }
    return acc;
  };
  auto f = FieldIntegrand::from_rule(dim_, n_marks, std::move(eval), std::move(anti));
  f.breaks_.assign(bp.begin() + 1, bp.end());
  return f;
}

StepIntegrand StepIntegrand::scaled(double c) const {
  auto cells = cells_;
  for (auto& interval : cells)
    for (auto& cell : interval) cell.coefficient *= c;
  AdaptedRule rule;
  if (adapted_)
    rule = [inner = adapted_, c](std::span<const Event> prefix, std::size_t j, std::size_t k) -> Point {
      return c * inner(prefix, j, k);
    };
  return StepIntegrand(breakpoints_, std::move(cells), std::move(rule));
}

double check_integrability(const FieldIntegrand& xi, const MarkSpace& ms, const SmoothSpace& sp, double horizon,
                           double h) {
  if (xi.n_marks() != ms.size()) throw DomainError("integrand: mark count does not match the mark space");
  if (xi.dim() != sp.dim()) throw DomainError("integrand: dimension does not match the space");
  double total = 0.0;
  for (std::size_t k = 0; k < ms.size(); ++k) {
    auto g = [&](double t) { return std::pow(norm(sp, xi(t, k)), sp.p()); };
    total += ms.weight(k) * piecewise_simpson(g, 0.0, horizon, h, xi.breaks(), 0.0);
  }
  if (!std::isfinite(total)) throw NumericError("integrand: int_0^T sum_k |xi|^p nu_k dt is not finite");
  return total;
}

}  // namespace jumpconv
