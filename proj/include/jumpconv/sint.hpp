#pragma once

// Pathwise stochastic integrals against N and the compensated measure, and
// sampled cadlag trajectories with a registry of jumps.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "jumpconv/integrand.hpp"
#include "jumpconv/prm.hpp"
#include "jumpconv/quadrature.hpp"
#include "jumpconv/space.hpp"

namespace jumpconv {

struct JumpRecord {
  double time;
  std::size_t mark;
  Point left;
  Point right;
};

/// Trajectory sampled at increasing times. Values at jump times are right
/// limits; the registry keeps both limits.
class CadlagPath {
 public:
  CadlagPath(double horizon, std::size_t dim);

  /// Appends a continuity point; t must not precede the last stored time.
  void push(double t, Point value);
  /// Appends a jump and its right value as a point at the jump time.
  void push_jump(JumpRecord jump);

  double horizon() const noexcept { return horizon_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return times_.size(); }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<Point>& values() const noexcept { return values_; }
  const std::vector<JumpRecord>& jumps() const noexcept { return jumps_; }

  /// Max norm over stored values and left limits.
  double sup_norm(const SmoothSpace& sp) const;

  /// Header "t,x1..xd,is_jump". A jump time gives two rows: the left limit
  /// with is_jump = 0, then the right value with is_jump = 1.
  void write_csv(std::ostream& os) const;

 private:
  double horizon_;
  std::size_t dim_;
  std::vector<double> times_;
  std::vector<Point> values_;
  std::vector<std::int64_t> jump_of_point_;
  std::vector<JumpRecord> jumps_;
};

/// Max over common sample points and jump left limits of |a - b|. Both paths
/// must share their sample times.
double sup_distance(const SmoothSpace& sp, const CadlagPath& a, const CadlagPath& b);

/// sum_j sum_k xi^k_{j-1} Ntilde((t_{j-1} ^ t, t_j ^ t] x A^k_{j-1}); adapted
/// coefficients are resolved on the given path.
Point integrate_step(const PoissonPath& path, const MarkSpace& ms, const StepIntegrand& f, double t);

/// sum_{t_i <= t} f(t_i, z_i) - int_0^t sum_k f(s, z_k) nu_k ds.
Point integrate_field(const PoissonPath& path, const MarkSpace& ms, const FieldIntegrand& f, double t,
                      const QuadratureConfig& quad = {});

/// Integral of 1_(a, b] 1_B f against the compensated measure.
Point integrate_restricted(const PoissonPath& path, const MarkSpace& ms, const FieldIntegrand& f, double a,
                           double b, const MarkSet& marks, const QuadratureConfig& quad = {});

/// int_a^b sum_k f(s, z_k) nu_k ds, exact when an antiderivative exists.
Point field_compensator(const MarkSpace& ms, const FieldIntegrand& f, double a, double b, double h);

/// Integral evaluated on grid plus event times, with both limits at events.
CadlagPath integral_path(const PoissonPath& path, const MarkSpace& ms, const FieldIntegrand& f,
                         const std::vector<double>& grid, const QuadratureConfig& quad = {});

/// sum_{t_i <= t} g(t_i, z_i). Throws DomainError on a negative value.
double ls_integral_N(const PoissonPath& path, const ScalarRule& g, double t);

/// int_0^t sum_k g(s, z_k) nu_k ds.
double ls_integral_nu(const MarkSpace& ms, const ScalarRule& g, double t, const QuadratureConfig& quad = {});

}  // namespace jumpconv
