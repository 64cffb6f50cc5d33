#pragma once

// Monte Carlo estimates of both sides of the maximal inequalities for the
// stochastic convolution, with common random numbers across sides, the
// stopped and higher-moment variants, the layer-cake device and the step
// approximation of integrands.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jumpconv/csv.hpp"
#include "jumpconv/sconv.hpp"

namespace jumpconv {

enum class Mode { thm4_6, thm4_9, cor4_10 };

std::string mode_name(Mode m);
/// Parses "thm4_6", "thm4_9" or "cor4_10".
Mode parse_mode(const std::string& s);

struct ExperimentConfig {
  ConvolutionScenario scenario;
  double q_prime = 2.0;
  std::size_t n_paths = 1000;
  std::uint64_t base_seed = 0;
  /// Evaluation time; defaults to the horizon.
  std::optional<double> t_eval{};
  std::optional<double> lambda_threshold{};
  std::optional<int> moment_level{};
  unsigned jobs = 1;

  double eval_time() const { return t_eval.value_or(scenario.horizon()); }
  /// q' > 0, t_eval in (0, T], n_paths >= 1000, jobs >= 1.
  void validate() const;
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct InequalityReport {
  std::string scenario_id;
  std::string mode;
  double p = 0.0;
  double q = 0.0;
  double q_prime = 0.0;
  std::size_t n_paths = 0;
  double lhs_mean = 0.0;
  double lhs_stderr = 0.0;
  double rhs_mean = 0.0;
  double rhs_stderr = 0.0;
  double ratio_hat = 0.0;
  double ratio_ci_lo = 0.0;
  double ratio_ci_hi = 0.0;
  /// Median over 10 contiguous path groups of the group ratios.
  double ratio_median_of_means = 0.0;
  double wall_ms = 0.0;

  bool finite() const;
};

/// Per-path quantities shared by every report of one scenario. `noise` is
/// sum_{t_i <= t} |xi(t_i, z_i)|^p. The stopped fields refer to the first
/// event where `noise` exceeds lambda^p and equal the unstopped ones on paths
/// that never cross.
struct PathStatistics {
  std::vector<double> sup_norm;
  std::vector<double> terminal_norm;
  std::vector<double> noise;
  std::vector<double> sup_stopped;
  std::vector<double> noise_stopped;
  std::vector<double> noise_before_tau;
  std::vector<double> tau_jump_noise;
  std::vector<double> max_jump_noise;
  /// Index of the stopping event, or -1.
  std::vector<std::int64_t> tau_index;
  double wall_ms = 0.0;

  std::size_t size() const noexcept { return sup_norm.size(); }
};

struct SimulationOptions {
  std::size_t n_paths = 1000;
  std::uint64_t base_seed = 0;
  double t_eval = 0.0;
  std::optional<double> lambda_threshold{};
  unsigned jobs = 1;
};

/// Runs paths i = 0..n-1 with substream seeds base_seed ^ i, in parallel,
/// storing results by index so the output does not depend on `jobs`.
PathStatistics simulate_paths(const ConvolutionEngine& engine, const SimulationOptions& opt);

/// Index of the first event with time <= t whose running sum of
/// |xi|^p exceeds lambda^p, or -1.
std::int64_t stopping_index(const ConvolutionScenario& scn, const PoissonPath& path, double t, double lambda);

/// Mean and standard error of the samples.
Estimate sample_estimate(std::span<const double> x);

/// E (sup_{s <= t} |u(s)|)^{q'}.
Estimate maximal_lhs(const ExperimentConfig& cfg);
/// E (int_0^t int_Z |xi|^p N(ds, dz))^{q'/p}.
Estimate maximal_rhs_N(const ExperimentConfig& cfg);
/// (int_0^t int_Z |xi|^p nu(dz) ds)^{q'/p}; requires q' <= p.
double maximal_rhs_nu(const ExperimentConfig& cfg);

/// Ratio of two sample means with a delta-method 99% interval.
InequalityReport ratio_report(std::span<const double> lhs, std::span<const double> rhs, bool rhs_deterministic);

/// Throws HypothesisError when q' lies outside the range of the statement.
void check_hypothesis(Mode mode, double q_prime, const SmoothSpace& sp);

InequalityReport inequality_report(const ExperimentConfig& cfg, Mode mode);
/// Same, reusing simulated statistics (the config's q' and mode select the
/// exponents).
InequalityReport inequality_report(const PathStatistics& stats, const ExperimentConfig& cfg, Mode mode);

struct StoppedReport {
  InequalityReport report;
  std::size_t n_stopped = 0;
  /// noise(tau-) <= lambda^p on every stopped path.
  bool pre_tau_bounded = true;
  /// stopped RHS <= min(unstopped RHS, (lambda^p + max jump)^{q/p}) pathwise.
  bool truncation_bounded = true;
  /// noise(tau) - noise(tau-) equals the jump mass at tau.
  bool left_limit_consistent = true;
};

/// Stopped at tau; exponent q of the space on both sides.
StoppedReport stopped_report(const ExperimentConfig& cfg);
StoppedReport stopped_report(const PathStatistics& stats, const ExperimentConfig& cfg);

struct LayerCakeReport {
  double direct_mean = 0.0;
  double direct_stderr = 0.0;
  /// Left-endpoint sum of P(X > l_j) (l_{j+1}^{q'} - l_j^{q'}).
  double tail_estimate = 0.0;
  /// Upper minus lower Riemann sum; brackets the exact tail integral.
  double quadrature_bound = 0.0;
  bool agree = false;
};

LayerCakeReport layer_cake_check(std::span<const double> samples, double q_prime, std::size_t n_levels);
/// Layer cake on the samples of sup |u|.
LayerCakeReport layer_cake_check(const ExperimentConfig& cfg, std::size_t n_levels);

struct HigherMomentReport {
  /// E sup |u|^{p^n} against sum_k (int int |xi|^{p^k} nu ds)^{p^{n-k}}.
  InequalityReport vector_report;
  /// E |u(t)|^{p^n}.
  Estimate terminal;
  /// Same bound for S = I and the real integrand |xi|.
  InequalityReport scalar_report;
  Estimate scalar_terminal;
};

/// The deterministic right-hand side for level n.
double higher_moment_rhs(const ConvolutionScenario& scn, double t, int level);
HigherMomentReport higher_moment_report(const ExperimentConfig& cfg);

struct IsometryReport {
  InequalityReport report;
  bool hilbert = false;
  /// (lhs - rhs) / lhs_stderr.
  double z_score = 0.0;
  /// |z| <= 4 in the Hilbert case; true otherwise.
  bool equality_holds = true;
};

/// E |I_t(xi)|^p against int_0^t int_Z |xi|^p nu ds.
IsometryReport ito_isometry_report(const ExperimentConfig& cfg);

/// Step approximant on 2^level equal intervals, valued at interval midpoints.
StepIntegrand midpoint_step_approximant(const FieldIntegrand& f, double horizon, int level);

struct StepApproxLevel {
  int level = 0;
  std::size_t intervals = 0;
  /// sum_k nu_k int_0^T |f - f^n|^p dt.
  double distance = 0.0;
  /// E |I_T(f^n) - I_T(f)|^p.
  Estimate integral_gap;
  double ratio = 0.0;
};

struct StepApproxReport {
  std::vector<StepApproxLevel> levels;
};

StepApproxReport step_approx_convergence(const ExperimentConfig& cfg, int refinements);

}  // namespace jumpconv
