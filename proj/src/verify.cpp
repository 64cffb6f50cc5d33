#include "jumpconv/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace jumpconv {

namespace {

constexpr double z99 = 2.5758293035489004;
constexpr std::size_t mom_groups = 10;

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

/// Runs body(i) for i in [0, n) on `jobs` threads, rethrowing the first
/// failure by index order.
template <class Body>
void parallel_for(std::size_t n, unsigned jobs, Body&& body) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + jobs - 1) / jobs;
  for (unsigned w = 0; w < jobs; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double jump_mass(const SmoothSpace& sp, const Point& xi) { return std::pow(norm(sp, xi), sp.p()); }

struct SupSink {
  static constexpr bool wants_midpoint = false;
  const SmoothSpace& sp;
  double threshold;  // lambda^p, or +inf
  double best = 0.0;
  double noise = 0.0;
  double max_jump = 0.0;
  std::int64_t count = 0;
  std::int64_t tau = -1;
  double best_at_tau = 0.0;
  double noise_at_tau = 0.0;
  double noise_before = 0.0;
  double jump_at_tau = 0.0;
  Point last;

  SupSink(const SmoothSpace& space, double cap) : sp(space), threshold(cap) {}

  void grid_point(double, const Point& u) {
    best = std::max(best, sp.power_sum(u));
    last = u;
  }
  void advance(double, double, const Point&, const Point*, const Point&) {}
  void jump(const Event&, const Point& left, const Point& right, const Point& xi) {
    best = std::max({best, sp.power_sum(left), sp.power_sum(right)});
    const double m = jump_mass(sp, xi);
    const double before = noise;
    noise += m;
    max_jump = std::max(max_jump, m);
    if (tau < 0 && noise > threshold) {
      tau = count;
      best_at_tau = best;
      noise_at_tau = noise;
      noise_before = before;
      jump_at_tau = m;
    }
    ++count;
  }
};

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

double group_ratio(std::span<const double> lhs, std::span<const double> rhs) {
  const double l = mean_of(lhs), r = mean_of(rhs);
  if (l == 0.0 && r == 0.0) return 0.0;
  return l / r;
}

void fill_common(InequalityReport& rep, const ExperimentConfig& cfg, const std::string& mode, double q_prime) {
  rep.scenario_id = cfg.scenario.id();
  rep.mode = mode;
  rep.p = cfg.scenario.space().p();
  rep.q = cfg.scenario.space().q();
  rep.q_prime = q_prime;
}

PathStatistics simulate_for(const ExperimentConfig& cfg) {
  cfg.validate();
  const ConvolutionEngine engine(cfg.scenario);
  return simulate_paths(engine, {cfg.n_paths, cfg.base_seed, cfg.eval_time(), cfg.lambda_threshold, cfg.jobs});
}

ScalarRule power_rule(const ConvolutionScenario& scn, double power) {
  return norm_power_rule(scn.space(), scn.integrand(), power);
}

}  // namespace

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::thm4_6: return "thm4_6";
    case Mode::thm4_9: return "thm4_9";
    case Mode::cor4_10: return "cor4_10";
  }
  return "?";
}

Mode parse_mode(const std::string& s) {
  if (s == "thm4_6") return Mode::thm4_6;
  if (s == "thm4_9") return Mode::thm4_9;
  if (s == "cor4_10") return Mode::cor4_10;
  throw DomainError("unknown mode '" + s + "' (expected thm4_6, thm4_9 or cor4_10)");
}

void ExperimentConfig::validate() const {
  if (!(q_prime > 0.0) || !std::isfinite(q_prime)) throw DomainError("experiment: q' must be finite and > 0");
  const double t = eval_time();
  if (!(t > 0.0 && t <= scenario.horizon())) throw DomainError("experiment: t_eval must lie in (0, T]");
  if (n_paths < 1000) throw DomainError("experiment: n_paths must be >= 1000");
  if (jobs < 1) throw DomainError("experiment: jobs must be >= 1");
  if (lambda_threshold && !(*lambda_threshold > 0.0)) throw DomainError("experiment: lambda must be > 0");
  if (moment_level && (*moment_level < 1 || *moment_level > 4))
    throw DomainError("experiment: moment level must be in 1..4");
}

bool InequalityReport::finite() const {
  for (double v : {lhs_mean, lhs_stderr, rhs_mean, rhs_stderr, ratio_hat, ratio_ci_lo, ratio_ci_hi})
    if (!std::isfinite(v)) return false;
  return true;
}

PathStatistics simulate_paths(const ConvolutionEngine& engine, const SimulationOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const auto& scn = engine.scenario();
  const auto& sp = scn.space();
  const std::size_t n = opt.n_paths;
  const double threshold =
      opt.lambda_threshold ? std::pow(*opt.lambda_threshold, sp.p()) : std::numeric_limits<double>::infinity();
  PathStatistics st;
  st.sup_norm.resize(n);
  st.terminal_norm.resize(n);
  st.noise.resize(n);
  st.sup_stopped.resize(n);
  st.noise_stopped.resize(n);
  st.noise_before_tau.resize(n);
  st.tau_jump_noise.resize(n);
  st.max_jump_noise.resize(n);
  st.tau_index.resize(n);
  parallel_for(n, opt.jobs, [&](std::size_t i) {
    Rng rng = Rng::substream(opt.base_seed, i);
    const PoissonPath path = sample_path(scn.marks(), scn.horizon(), rng);
    SupSink sink(sp, threshold);
    engine.run(path, sink, opt.t_eval);
    st.sup_norm[i] = sp.norm_from_power_sum(sink.best);
    st.terminal_norm[i] = norm(sp, sink.last);
    st.noise[i] = sink.noise;
    st.max_jump_noise[i] = sink.max_jump;
    st.tau_index[i] = sink.tau;
    if (sink.tau >= 0) {
      st.sup_stopped[i] = sp.norm_from_power_sum(sink.best_at_tau);
      st.noise_stopped[i] = sink.noise_at_tau;
      st.noise_before_tau[i] = sink.noise_before;
      st.tau_jump_noise[i] = sink.jump_at_tau;
    } else {
      st.sup_stopped[i] = st.sup_norm[i];
      st.noise_stopped[i] = sink.noise;
      st.noise_before_tau[i] = sink.noise;
      st.tau_jump_noise[i] = 0.0;
    }
    if (!std::isfinite(st.sup_norm[i]) || !std::isfinite(st.noise[i]))
      throw NumericError("path " + std::to_string(i) + " of scenario " + scn.id() + " has non-finite values");
  });
  st.wall_ms = elapsed_ms(start);
  return st;
}

std::int64_t stopping_index(const ConvolutionScenario& scn, const PoissonPath& path, double t, double lambda) {
  const double threshold = std::pow(lambda, scn.space().p());
  double noise = 0.0;
  std::int64_t k = 0;
  for (const auto& e : path.prefix(t)) {
    noise += jump_mass(scn.space(), scn.integrand()(e.time, e.mark));
    if (noise > threshold) return k;
    ++k;
  }
  return -1;
}

Estimate sample_estimate(std::span<const double> x) {
  Estimate e;
  if (x.empty()) return e;
  e.mean = mean_of(x);
  if (x.size() < 2) return e;
  double ss = 0.0;
  for (double v : x) ss += (v - e.mean) * (v - e.mean);
  e.std_error = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  return e;
}

InequalityReport ratio_report(std::span<const double> lhs, std::span<const double> rhs, bool rhs_deterministic) {
  if (lhs.size() != rhs.size() || lhs.empty()) throw DomainError("ratio_report: sample sizes differ or are empty");
  const std::size_t m = lhs.size();
  const auto md = static_cast<double>(m);
  InequalityReport rep;
  rep.n_paths = m;
  const Estimate l = sample_estimate(lhs);
  const Estimate r = sample_estimate(rhs);
  rep.lhs_mean = l.mean;
  rep.lhs_stderr = l.std_error;
  rep.rhs_mean = r.mean;
  rep.rhs_stderr = rhs_deterministic ? 0.0 : r.std_error;
  if (l.mean == 0.0 && r.mean == 0.0) {
    rep.ratio_hat = rep.ratio_ci_lo = rep.ratio_ci_hi = rep.ratio_median_of_means = 0.0;
    return rep;
  }
  rep.ratio_hat = l.mean / r.mean;
  double var_l = 0.0, var_r = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dl = lhs[i] - l.mean, dr = rhs_deterministic ? 0.0 : rhs[i] - r.mean;
    var_l += dl * dl;
    var_r += dr * dr;
    cov += dl * dr;
  }
  const double denom = m > 1 ? md - 1.0 : 1.0;
  var_l /= denom;
  var_r /= denom;
  cov /= denom;
  const double ratio = rep.ratio_hat;
  const double var_ratio = std::max(0.0, (var_l - 2.0 * ratio * cov + ratio * ratio * var_r) / (r.mean * r.mean * md));
  const double half = z99 * std::sqrt(var_ratio);
  rep.ratio_ci_lo = ratio - half;
  rep.ratio_ci_hi = ratio + half;

  const std::size_t groups = std::min(mom_groups, m);
  std::vector<double> g(groups);
  for (std::size_t k = 0; k < groups; ++k) {
    const std::size_t lo = k * m / groups, hi = (k + 1) * m / groups;
    g[k] = group_ratio(lhs.subspan(lo, hi - lo), rhs.subspan(lo, hi - lo));
  }
  std::sort(g.begin(), g.end());
  rep.ratio_median_of_means = groups % 2 == 1 ? g[groups / 2] : 0.5 * (g[groups / 2 - 1] + g[groups / 2]);
  return rep;
}

void check_hypothesis(Mode mode, double q_prime, const SmoothSpace& sp) {
  if (!(q_prime > 0.0) || !std::isfinite(q_prime)) throw HypothesisError("0 < q' < infinity", "q' must be positive");
  if (mode == Mode::thm4_6 && q_prime < sp.q())
    throw HypothesisError("q' >= q", "q' = " + csv::number(q_prime) + " is below q = " + csv::number(sp.q()));
  if (mode == Mode::cor4_10 && q_prime > sp.p())
    throw HypothesisError("q' <= p", "q' = " + csv::number(q_prime) + " exceeds p = " + csv::number(sp.p()));
}

Estimate maximal_lhs(const ExperimentConfig& cfg) {
  const auto st = simulate_for(cfg);
  std::vector<double> x(st.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::pow(st.sup_norm[i], cfg.q_prime);
  return sample_estimate(x);
}

Estimate maximal_rhs_N(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& scn = cfg.scenario;
  const double t = cfg.eval_time();
  const double expo = cfg.q_prime / scn.space().p();
  const ScalarRule g = power_rule(scn, scn.space().p());
  std::vector<double> x(cfg.n_paths);
  parallel_for(cfg.n_paths, cfg.jobs, [&](std::size_t i) {
    Rng rng = Rng::substream(cfg.base_seed, i);
    const PoissonPath path = sample_path(scn.marks(), scn.horizon(), rng);
    x[i] = std::pow(ls_integral_N(path, g, t), expo);
  });
  return sample_estimate(x);
}

double maximal_rhs_nu(const ExperimentConfig& cfg) {
  check_hypothesis(Mode::cor4_10, cfg.q_prime, cfg.scenario.space());
  const auto& scn = cfg.scenario;
  const double inner = ls_integral_nu(scn.marks(), power_rule(scn, scn.space().p()), cfg.eval_time(), scn.quadrature());
  return std::pow(inner, cfg.q_prime / scn.space().p());
}

InequalityReport inequality_report(const ExperimentConfig& cfg, Mode mode) {
  check_hypothesis(mode, cfg.q_prime, cfg.scenario.space());
  return inequality_report(simulate_for(cfg), cfg, mode);
}

InequalityReport inequality_report(const PathStatistics& st, const ExperimentConfig& cfg, Mode mode) {
  const auto start = std::chrono::steady_clock::now();
  check_hypothesis(mode, cfg.q_prime, cfg.scenario.space());
  const double p = cfg.scenario.space().p();
  const std::size_t m = st.size();
  std::vector<double> lhs(m), rhs(m);
  for (std::size_t i = 0; i < m; ++i) lhs[i] = std::pow(st.sup_norm[i], cfg.q_prime);
  const bool deterministic = mode == Mode::cor4_10;
  if (deterministic) {
    std::fill(rhs.begin(), rhs.end(), maximal_rhs_nu(cfg));
  } else {
    for (std::size_t i = 0; i < m; ++i) rhs[i] = std::pow(st.noise[i], cfg.q_prime / p);
  }
  InequalityReport rep = ratio_report(lhs, rhs, deterministic);
  fill_common(rep, cfg, mode_name(mode), cfg.q_prime);
  rep.wall_ms = st.wall_ms + elapsed_ms(start);
  return rep;
}

StoppedReport stopped_report(const ExperimentConfig& cfg) {
  if (!cfg.lambda_threshold) throw DomainError("stopped_report: lambda threshold required");
  return stopped_report(simulate_for(cfg), cfg);
}

StoppedReport stopped_report(const PathStatistics& st, const ExperimentConfig& cfg) {
  if (!cfg.lambda_threshold) throw DomainError("stopped_report: lambda threshold required");
  const auto start = std::chrono::steady_clock::now();
  const auto& sp = cfg.scenario.space();
  const double q = sp.q(), p = sp.p();
  const double cap = std::pow(*cfg.lambda_threshold, p);
  const std::size_t m = st.size();
  StoppedReport out;
  std::vector<double> lhs(m), rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    lhs[i] = std::pow(st.sup_stopped[i], q);
    rhs[i] = std::pow(st.noise_stopped[i], q / p);
    const double unstopped = std::pow(st.noise[i], q / p);
    const double overshoot = std::pow(cap + st.max_jump_noise[i], q / p);
    if (rhs[i] > std::min(unstopped, overshoot)) out.truncation_bounded = false;
    if (st.tau_index[i] >= 0) {
      ++out.n_stopped;
      if (st.noise_before_tau[i] > cap) out.pre_tau_bounded = false;
      const double gap = st.noise_stopped[i] - st.noise_before_tau[i];
      if (std::abs(gap - st.tau_jump_noise[i]) > 1e-12 * std::max(1.0, st.noise_stopped[i]))
        out.left_limit_consistent = false;
    }
  }
  out.report = ratio_report(lhs, rhs, false);
  fill_common(out.report, cfg, "stopped", q);
  out.report.wall_ms = st.wall_ms + elapsed_ms(start);
  return out;
}

LayerCakeReport layer_cake_check(std::span<const double> samples, double q_prime, std::size_t n_levels) {
  if (n_levels < 100) throw DomainError("layer_cake_check: n_levels must be >= 100");
  if (samples.empty()) throw DomainError("layer_cake_check: no samples");
  LayerCakeReport rep;
  std::vector<double> powered(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i] >= 0.0)) throw DomainError("layer_cake_check: samples must be nonnegative");
    powered[i] = std::pow(samples[i], q_prime);
  }
  const Estimate direct = sample_estimate(powered);
  rep.direct_mean = direct.mean;
  rep.direct_stderr = direct.std_error;
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double top = sorted.back();
  const auto n = static_cast<double>(sorted.size());
  auto tail = [&](double level) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), level);
    return static_cast<double>(above) / n;
  };
  double upper = 0.0, lower = 0.0;
  if (top > 0.0) {
    double lo_pow = 0.0, p_lo = tail(0.0);
    for (std::size_t j = 1; j <= n_levels; ++j) {
      const double hi = j == n_levels ? top : top * static_cast<double>(j) / static_cast<double>(n_levels);
      const double hi_pow = std::pow(hi, q_prime);
      const double p_hi = tail(hi);
      upper += p_lo * (hi_pow - lo_pow);
      lower += p_hi * (hi_pow - lo_pow);
      lo_pow = hi_pow;
      p_lo = p_hi;
    }
  }
  rep.tail_estimate = upper;
  rep.quadrature_bound = upper - lower;
  rep.agree = std::abs(rep.tail_estimate - rep.direct_mean) <= 4.0 * rep.direct_stderr + rep.quadrature_bound;
  return rep;
}

LayerCakeReport layer_cake_check(const ExperimentConfig& cfg, std::size_t n_levels) {
  const auto st = simulate_for(cfg);
  return layer_cake_check(st.sup_norm, cfg.q_prime, n_levels);
}

double higher_moment_rhs(const ConvolutionScenario& scn, double t, int level) {
  if (level < 1 || level > 4) throw DomainError("higher_moment: level must be in 1..4");
  const double p = scn.space().p();
  double total = 0.0;
  for (int k = 1; k <= level; ++k) {
    const double inner = ls_integral_nu(scn.marks(), power_rule(scn, std::pow(p, k)), t, scn.quadrature());
    total += std::pow(inner, std::pow(p, level - k));
  }
  if (!std::isfinite(total)) throw DomainError("higher_moment: p^n powers overflow the floating-point range");
  return total;
}

namespace {

InequalityReport moment_report(const PathStatistics& st, const ExperimentConfig& cfg, int level, double rhs_value,
                               const std::string& mode, Estimate* terminal) {
  const double e = std::pow(cfg.scenario.space().p(), level);
  const std::size_t m = st.size();
  std::vector<double> lhs(m), term(m), rhs(m, rhs_value);
  for (std::size_t i = 0; i < m; ++i) {
    lhs[i] = std::pow(st.sup_norm[i], e);
    term[i] = std::pow(st.terminal_norm[i], e);
  }
  *terminal = sample_estimate(term);
  InequalityReport rep = ratio_report(lhs, rhs, true);
  fill_common(rep, cfg, mode, e);
  rep.wall_ms = st.wall_ms;
  return rep;
}

}  // namespace

HigherMomentReport higher_moment_report(const ExperimentConfig& cfg) {
  if (!cfg.moment_level) throw DomainError("higher_moment_report: moment level required");
  cfg.validate();
  const int level = *cfg.moment_level;
  const auto& scn = cfg.scenario;
  const double t = cfg.eval_time();
  HigherMomentReport out;
  const auto st = simulate_for(cfg);
  out.vector_report =
      moment_report(st, cfg, level, higher_moment_rhs(scn, t, level), "higher_moment", &out.terminal);

  // Real-valued integrand |xi| driven through the identity semigroup.
  const SmoothSpace sp1(1, 2.0, 2.0, scn.space().p());
  const auto& xi = scn.integrand();
  const auto& sp = scn.space();
  FieldIntegrand::Rule eval = [xi, sp](double s, std::size_t k) { return Point::Constant(1, norm(sp, xi(s, k))); };
  FieldIntegrand::Rule anti;
  if (const auto* c = xi.polynomial_coefficients(); c && (*c)[0].cols() == 1)
    anti = [xi, sp](double s, std::size_t k) { return Point::Constant(1, s * norm(sp, xi(0.0, k))); };
  FieldIntegrand scalar = FieldIntegrand::from_rule(1, scn.marks().size(), eval, anti);
  const ConvolutionScenario scalar_scn(scn.id() + "/scalar", scn.marks(), sp1, Generator::identity(1),
                                       std::move(scalar), scn.horizon(), scn.grid(), scn.quadrature());
  ExperimentConfig scfg = cfg;
  scfg.scenario = scalar_scn;
  const auto sst = simulate_for(scfg);
  out.scalar_report = moment_report(sst, scfg, level, higher_moment_rhs(scalar_scn, t, level),
                                    "higher_moment_scalar", &out.scalar_terminal);
  return out;
}

IsometryReport ito_isometry_report(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto& scn = cfg.scenario;
  const auto& sp = scn.space();
  const double p = sp.p();
  const double t = cfg.eval_time();
  const Point comp = field_compensator(scn.marks(), scn.integrand(), 0.0, t, scn.quadrature().step(scn.horizon()));
  std::vector<double> lhs(cfg.n_paths);
  parallel_for(cfg.n_paths, cfg.jobs, [&](std::size_t i) {
    Rng rng = Rng::substream(cfg.base_seed, i);
    const PoissonPath path = sample_path(scn.marks(), scn.horizon(), rng);
    Point acc = Point::Zero(static_cast<Eigen::Index>(sp.dim()));
    for (const auto& e : path.prefix(t)) acc += scn.integrand()(e.time, e.mark);
    acc -= comp;
    lhs[i] = std::pow(norm(sp, acc), p);
  });
  const double rhs_value = ls_integral_nu(scn.marks(), power_rule(scn, p), t, scn.quadrature());
  std::vector<double> rhs(cfg.n_paths, rhs_value);
  IsometryReport out;
  out.report = ratio_report(lhs, rhs, true);
  fill_common(out.report, cfg, "ito_isometry", p);
  out.report.wall_ms = elapsed_ms(start);
  out.hilbert = sp.r() == 2.0 && p == 2.0;
  const double se = out.report.lhs_stderr;
  const double diff = out.report.lhs_mean - out.report.rhs_mean;
  out.z_score = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  out.equality_holds = !out.hilbert || std::abs(out.z_score) <= 4.0;
  return out;
}

StepIntegrand midpoint_step_approximant(const FieldIntegrand& f, double horizon, int level) {
  if (level < 0 || level > 30) throw DomainError("step approximant: level must be in 0..30");
  const std::size_t n = std::size_t{1} << level;
  std::vector<double> bp(n + 1);
  for (std::size_t j = 0; j <= n; ++j) bp[j] = horizon * static_cast<double>(j) / static_cast<double>(n);
  bp.back() = horizon;
  std::vector<std::vector<StepCell>> cells(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double mid = 0.5 * (bp[j] + bp[j + 1]);
    for (std::size_t k = 0; k < f.n_marks(); ++k)
      cells[j].push_back({MarkSet::only(f.n_marks(), k), f(mid, k)});
  }
  return StepIntegrand(std::move(bp), std::move(cells));
}

StepApproxReport step_approx_convergence(const ExperimentConfig& cfg, int refinements) {
  cfg.validate();
  if (refinements < 1 || refinements > 16) throw DomainError("step_approx_convergence: refinements must be in 1..16");
  const auto& scn = cfg.scenario;
  const auto& sp = scn.space();
  const auto& f = scn.integrand();
  const double horizon = scn.horizon();
  const double p = sp.p();
  const std::size_t marks = scn.marks().size();
  const double fine = horizon / 65536.0;
  const Point comp_f = field_compensator(scn.marks(), f, 0.0, horizon, scn.quadrature().step(horizon));
  StepApproxReport out;
  for (int level = 1; level <= refinements; ++level) {
    const StepIntegrand step = midpoint_step_approximant(f, horizon, level);
    const FieldIntegrand step_field = step.as_field(marks);
    // Break at mesh points and midpoints so every piece is smooth.
    std::vector<double> breaks;
    const auto& bp = step.breakpoints();
    for (std::size_t j = 0; j + 1 < bp.size(); ++j) {
      if (j > 0) breaks.push_back(bp[j]);
      breaks.push_back(0.5 * (bp[j] + bp[j + 1]));
    }
    double distance = 0.0;
    for (std::size_t k = 0; k < marks; ++k) {
      auto gap = [&](double s) { return std::pow(norm(sp, f(s, k) - step_field(s, k)), p); };
      distance += scn.marks().weight(k) * piecewise_simpson(gap, 0.0, horizon, fine, breaks, 0.0);
    }
    std::vector<double> sample(cfg.n_paths);
    parallel_for(cfg.n_paths, cfg.jobs, [&](std::size_t i) {
      Rng rng = Rng::substream(cfg.base_seed, i);
      const PoissonPath path = sample_path(scn.marks(), horizon, rng);
      Point exact = Point::Zero(static_cast<Eigen::Index>(sp.dim()));
      for (const auto& e : path.events()) exact += f(e.time, e.mark);
      exact -= comp_f;
      sample[i] = std::pow(norm(sp, integrate_step(path, scn.marks(), step, horizon) - exact), p);
    });
    StepApproxLevel lv;
    lv.level = level;
    lv.intervals = step.intervals();
    lv.distance = distance;
    lv.integral_gap = sample_estimate(sample);
    lv.ratio = distance > 0.0 ? lv.integral_gap.mean / distance : 0.0;
    out.levels.push_back(lv);
  }
  return out;
}

}  // namespace jumpconv
