#pragma once

// Deterministic integrands xi(t, z) on [0, T] x Z. Deterministic fields are
// predictable; step integrands may additionally depend on the path prefix
// up to the left end of each interval.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "jumpconv/prm.hpp"
#include "jumpconv/space.hpp"

namespace jumpconv {

/// xi(t, z_k) taking values in R^d, continuous in t for each mark.
class FieldIntegrand {
 public:
  using Rule = std::function<Point(double t, std::size_t mark)>;

  static FieldIntegrand zero(std::size_t dim, std::size_t n_marks);
  static FieldIntegrand constant(std::vector<Point> per_mark);
  /// xi(t, z_k) = sum_j coefficients[k].col(j) * t^j.
  static FieldIntegrand polynomial(std::vector<Matrix> coefficients);
  /// Arbitrary rule; `antiderivative`, when given, must satisfy dF/dt = xi.
  static FieldIntegrand from_rule(std::size_t dim, std::size_t n_marks, Rule eval, Rule antiderivative = {});

  std::size_t dim() const noexcept { return dim_; }
  std::size_t n_marks() const noexcept { return n_marks_; }

  Point operator()(double t, std::size_t mark) const;
  bool has_antiderivative() const noexcept { return poly_ || static_cast<bool>(anti_); }
  Point antiderivative(double t, std::size_t mark) const;

  /// Coefficient matrices (d x (degree + 1)) per mark, when polynomial in t.
  const std::vector<Matrix>* polynomial_coefficients() const noexcept { return poly_ ? &*poly_ : nullptr; }
  /// True for the identically-zero integrand.
  bool is_zero() const noexcept { return zero_; }
  /// Interior times where xi may jump (left-continuous there). Empty for
  /// continuous fields.
  const std::vector<double>& breaks() const noexcept { return breaks_; }

  /// sum_k nu_k xi(t, z_k).
  Point drift(const MarkSpace& ms, double t) const;
  /// Coefficients of the drift polynomial, sum_k nu_k C_k (polynomial integrands only).
  Matrix drift_coefficients(const MarkSpace& ms) const;

  /// x -> L x applied to every value.
  FieldIntegrand mapped(const Matrix& l) const;
  FieldIntegrand scaled(double c) const;
  /// Same values; drops the exact antiderivative so quadrature paths are used.
  FieldIntegrand without_antiderivative() const;

 private:
  friend class StepIntegrand;
  FieldIntegrand() = default;
  std::size_t dim_ = 0;
  std::size_t n_marks_ = 0;
  bool zero_ = false;
  std::optional<std::vector<Matrix>> poly_;
  Rule eval_;
  Rule anti_;
  std::vector<double> breaks_;
};

/// Scalar nonnegative rule g(t, z_k), for Lebesgue-Stieltjes integrals.
struct ScalarRule {
  std::function<double(double, std::size_t)> eval;
  /// Optional exact time antiderivative.
  std::function<double(double, std::size_t)> antiderivative;
  /// Interior discontinuity times, as for FieldIntegrand::breaks.
  std::vector<double> breaks;
};

/// g = |xi|^power in the space norm.
ScalarRule norm_power_rule(const SmoothSpace& sp, const FieldIntegrand& xi, double power);

struct StepCell {
  MarkSet cell;
  Point coefficient;
};

/// f(t, z) = sum_j sum_k xi^k_{j-1} 1_(t_{j-1}, t_j](t) 1_{A^k_{j-1}}(z).
class StepIntegrand {
 public:
  /// Coefficient rule for adapted integrands: receives only the events with
  /// time <= t_{j-1}, the interval index j - 1 and the cell index.
  using AdaptedRule = std::function<Point(std::span<const Event> prefix, std::size_t interval, std::size_t cell)>;

  /// breakpoints: 0 = t_0 < ... < t_n; cells[j] lists the disjoint cells of
  /// interval (t_j, t_{j+1}].
  StepIntegrand(std::vector<double> breakpoints, std::vector<std::vector<StepCell>> cells,
                AdaptedRule adapted = {});

  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<std::vector<StepCell>>& cells() const noexcept { return cells_; }
  std::size_t intervals() const noexcept { return cells_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  bool adapted() const noexcept { return static_cast<bool>(adapted_); }

  /// Fixes adapted coefficients on a given path.
  StepIntegrand resolve(const PoissonPath& path) const;
  /// Deterministic step rule as a field with an exact antiderivative.
  FieldIntegrand as_field(std::size_t n_marks) const;
  StepIntegrand scaled(double c) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<std::vector<StepCell>> cells_;
  AdaptedRule adapted_;
  std::size_t dim_ = 0;
};

/// Sum_k nu_k int_0^T |xi(t, z_k)|^p dt by Simpson; throws NumericError if
/// the value is not finite.
double check_integrability(const FieldIntegrand& xi, const MarkSpace& ms, const SmoothSpace& sp, double horizon,
                           double h);

}  // namespace jumpconv
