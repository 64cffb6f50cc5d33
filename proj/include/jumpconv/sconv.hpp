#pragma once

// Stochastic convolution u(t) = int_0^t int_Z S(t - s) xi(s, z) Ntilde(ds, dz)
// built by exact cell-wise propagation, with the direct sum kept as an
// oracle, plus the strong-solution residual, the Yosida scheme and the
// decomposition of phi(u(t)) into drift, martingale and jump parts.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "jumpconv/errors.hpp"
#include "jumpconv/integrand.hpp"
#include "jumpconv/prm.hpp"
#include "jumpconv/quadrature.hpp"
#include "jumpconv/sgp.hpp"
#include "jumpconv/sint.hpp"
#include "jumpconv/space.hpp"

namespace jumpconv {

/// Uniform grid with `count` cells, or explicit sample times in [0, T].
struct GridSpec {
  std::size_t count = 4096;
  std::vector<double> times;
};

class ConvolutionScenario {
 public:
  /// Validates dimensions, grid and integrability and certifies that gen is
  /// a contraction for the norm of sp (HypothesisError otherwise).
  ConvolutionScenario(std::string id, MarkSpace ms, SmoothSpace sp, Generator gen, FieldIntegrand xi,
                      double horizon, GridSpec grid = {}, QuadratureConfig quad = {});
  /// Deterministic step integrand, converted with as_field.
  ConvolutionScenario(std::string id, MarkSpace ms, SmoothSpace sp, Generator gen, const StepIntegrand& xi,
                      double horizon, GridSpec grid = {}, QuadratureConfig quad = {});

  const std::string& id() const noexcept { return id_; }
  const MarkSpace& marks() const noexcept { return ms_; }
  const SmoothSpace& space() const noexcept { return sp_; }
  const Generator& generator() const noexcept { return gen_; }
  const FieldIntegrand& integrand() const noexcept { return xi_; }
  double horizon() const noexcept { return horizon_; }
  const GridSpec& grid() const noexcept { return grid_; }
  const QuadratureConfig& quadrature() const noexcept { return quad_; }
  /// Largest sampled |S(t)x| / |x| found during certification.
  double contraction_ratio() const noexcept { return contraction_ratio_; }
  /// sum_k nu_k int_0^T |xi|^p dt.
  double integrability() const noexcept { return integrability_; }

  /// Same scenario with another integrand; certification is reused.
  ConvolutionScenario with_integrand(FieldIntegrand xi, std::string id = {}) const;
  ConvolutionScenario with_grid(GridSpec grid) const;
  ConvolutionScenario with_space(SmoothSpace sp) const;

  /// Sorted sample times: 0, the grid and T.
  std::vector<double> sample_times() const;

 private:
  void validate_shape() const;
  std::string id_;
  MarkSpace ms_;
  SmoothSpace sp_;
  Generator gen_;
  FieldIntegrand xi_;
  double horizon_;
  GridSpec grid_;
  QuadratureConfig quad_;
  double contraction_ratio_ = 0.0;
  double integrability_ = 0.0;
};

/// Precomputed cell propagators and compensators for one scenario. Runs a
/// path through a sink that receives
///   grid_point(t, u)                 at every cell boundary (right values),
///   advance(a, b, u_a, u_mid, u_b)   for each jump-free stretch, with u_b
///                                    the left limit at b and u_mid null
///                                    unless Sink::wants_midpoint,
///   jump(event, left, right, xi)     at every event.
class ConvolutionEngine {
 public:
  explicit ConvolutionEngine(ConvolutionScenario scn);

  struct Flow {
    Matrix prop;  // S(b - a)
    Point comp;   // int_a^b S(b - s) m(s) ds
  };

  const ConvolutionScenario& scenario() const noexcept { return scn_; }
  const std::vector<double>& boundaries() const noexcept { return bounds_; }
  /// Flow over [a, b]; exact for polynomial integrands, Simpson otherwise.
  Flow flow(double a, double b) const;

  /// m(s+) = sum_k nu_k xi(s+, z_k), the right limit at breaks of xi.
  Point drift_after(double s) const;

  template <class Sink>
  void run(const PoissonPath& path, Sink& sink) const {
    run(path, sink, scn_.horizon());
  }
  template <class Sink>
  void run(const PoissonPath& path, Sink& sink, double t_end) const;

 private:
  struct Cell {
    std::size_t prop;  // index into props_
    Point comp;
    Point half_comp;
  };
  Flow flow_with_length(double a, double delta) const;

  ConvolutionScenario scn_;
  bool identity_;
  double h_;  // quadrature panel width
  std::vector<double> bounds_;
  std::vector<Cell> cells_;
  std::vector<Matrix> props_;
  std::vector<Matrix> half_props_;
  std::optional<Matrix> drift_poly_;
};

/// Direct evaluation sum_{t_i <= t} S(t - t_i) xi(t_i, z_i) - int_0^t S(t - s) m(s) ds.
Point convolve_at(const ConvolutionEngine& engine, const PoissonPath& path, double t);
Point convolve_at(const ConvolutionScenario& scn, const PoissonPath& path, double t);

/// u on sample times plus event times, with both limits at events.
CadlagPath convolution_path(const ConvolutionEngine& engine, const PoissonPath& path);
CadlagPath convolution_path(const ConvolutionScenario& scn, const PoissonPath& path);

/// max over sample times of |u(t) - int_0^t A u ds - I_t(xi)|, with the
/// time integral by the trapezoid rule on jump-free stretches.
double strong_solution_residual(const ConvolutionEngine& engine, const PoissonPath& path);
double strong_solution_residual(const ConvolutionScenario& scn, const PoissonPath& path);

/// Scenario with xi replaced by n R(n, A) xi.
ConvolutionScenario yosida_scenario(const ConvolutionScenario& scn, double n);
CadlagPath yosida_convolution(const ConvolutionScenario& scn, const PoissonPath& path, double n);

struct ItoTerms {
  double phi_u_t = 0.0;
  double drift_term = 0.0;
  double mart_term = 0.0;
  double jump_term = 0.0;
  double initial = 0.0;
  /// Quadrature error estimate for drift and compensator integrals.
  double tolerance = 0.0;
  double sup_phi = 0.0;

  double identity_gap() const { return phi_u_t - initial - (drift_term + mart_term + jump_term); }
};

ItoTerms ito_terms(const ConvolutionEngine& engine, const PoissonPath& path, double t);
ItoTerms ito_terms(const ConvolutionScenario& scn, const PoissonPath& path, double t);

// ---------------------------------------------------------------------------

template <class Sink>
void ConvolutionEngine::run(const PoissonPath& path, Sink& sink, double t_end) const {
  if (!(t_end >= 0.0 && t_end <= scn_.horizon())) throw DomainError("convolution: t must lie in [0, T]");
  if (path.n_marks() != scn_.marks().size()) throw DomainError("convolution: path and mark space disagree");
  if (path.horizon() != scn_.horizon()) throw DomainError("convolution: path horizon differs from scenario");
  constexpr bool mid = Sink::wants_midpoint;
  const auto d = static_cast<Eigen::Index>(scn_.space().dim());
  Point u = Point::Zero(d);
  Point next(d);
  Point half(d);
  sink.grid_point(0.0, u);
  const auto events = path.events();
  std::size_t e = 0;

  auto segment = [&](double s0, double s1) {
    const Flow f = flow(s0, s1);
    next = f.prop * u - f.comp;
    if constexpr (mid) {
      const double m = 0.5 * (s0 + s1);
      const Flow g = flow(s0, m);
      half = g.prop * u - g.comp;
      sink.advance(s0, s1, u, &half, next);
    } else {
      sink.advance(s0, s1, u, static_cast<const Point*>(nullptr), next);
    }
    u = next;
  };

  for (std::size_t j = 0; j + 1 < bounds_.size(); ++j) {
    const double a = bounds_[j];
    if (a >= t_end) break;
    const double b = std::min(bounds_[j + 1], t_end);
    const bool whole = b == bounds_[j + 1];
    if (whole && (e == events.size() || events[e].time > b)) {
      const Cell& c = cells_[j];
      if (identity_) {
        next = u - c.comp;
      } else {
        next.noalias() = props_[c.prop] * u;
        next -= c.comp;
      }
      if constexpr (mid) {
        if (identity_) {
          half = u - c.half_comp;
        } else {
          half.noalias() = half_props_[c.prop] * u;
          half -= c.half_comp;
        }
        sink.advance(a, b, u, &half, next);
      } else {
        sink.advance(a, b, u, static_cast<const Point*>(nullptr), next);
      }
      u = next;
    } else {
      double s0 = a;
      while (e < events.size() && events[e].time <= b) {
        const Event& ev = events[e];
        if (ev.time > s0) segment(s0, ev.time);
        const Point xi = scn_.integrand()(ev.time, ev.mark);
        const Point left = u;
        u += xi;
        sink.jump(ev, left, u, xi);
        s0 = ev.time;
        ++e;
      }
      if (b > s0) segment(s0, b);
    }
    sink.grid_point(b, u);
  }
}

}  // namespace jumpconv
