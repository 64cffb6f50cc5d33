// Acceptance runner: one PASS/FAIL line per criterion.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "jumpconv/cli.hpp"
#include "jumpconv/verify.hpp"
#include "scenarios.hpp"

using namespace jumpconv;
using namespace jumpconv::testing;

namespace {

unsigned g_jobs = 1;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Notes {
 public:
  template <class... A>
  void add(const char* fmt, A... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, a...);
    if (!text_.empty()) text_ += "; ";
    text_ += buf;
  }
  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

ExperimentConfig experiment(const ConvolutionScenario& scn, double q_prime, std::size_t n, std::uint64_t seed) {
  ExperimentConfig c{scn};
  c.q_prime = q_prime;
  c.n_paths = n;
  c.base_seed = seed;
  c.jobs = g_jobs;
  return c;
}

PathStatistics head(const PathStatistics& st, std::size_t n) {
  PathStatistics out;
  auto cut = [n](const auto& v) { return std::vector(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n)); };
  out.sup_norm = cut(st.sup_norm);
  out.terminal_norm = cut(st.terminal_norm);
  out.noise = cut(st.noise);
  out.sup_stopped = cut(st.sup_stopped);
  out.noise_stopped = cut(st.noise_stopped);
  out.noise_before_tau = cut(st.noise_before_tau);
  out.tau_index = cut(st.tau_index);
  out.tau_jump_noise = cut(st.tau_jump_noise);
  out.max_jump_noise = cut(st.max_jump_noise);
  return out;
}

double drift_factor(double a, double b) { return std::max(a / b, b / a); }

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

// A1 -----------------------------------------------------------------------
Outcome exact_oracle() {
  Rng rng(0xa1);
  const MarkSpace ms({1.0, 2.5, 0.5, 1.5});
  const std::size_t marks = ms.size();
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.next_u64() % 8;
    const std::size_t dim = 1 + rng.next_u64() % 4;
    std::vector<double> bp{0.0};
    for (std::size_t j = 1; j < n; ++j) bp.push_back(bp.back() + (2.0 - bp.back()) * rng.uniform() * 0.5);
    bp.push_back(2.0);
    std::vector<std::vector<StepCell>> cells(n);
    for (auto& row : cells) {
      // Random partition of a random subset of marks into cells.
      std::vector<std::size_t> owner(marks);
      for (auto& o : owner) o = rng.next_u64() % (marks + 1);
      for (std::size_t c = 0; c < marks; ++c) {
        std::vector<std::size_t> ks;
        for (std::size_t k = 0; k < marks; ++k)
          if (owner[k] == c) ks.push_back(k);
        if (ks.empty()) continue;
        Point v(static_cast<Eigen::Index>(dim));
        for (auto& x : v) x = rng.normal() * 3.0;
        row.push_back({MarkSet::of(marks, ks), v});
      }
      if (row.empty()) row.push_back({MarkSet::all(marks), Point::Ones(static_cast<Eigen::Index>(dim))});
    }
    const StepIntegrand f(bp, std::move(cells));
    const PoissonPath path = sample_path(ms, 2.0, rng);
    const double t = trial % 3 == 0 ? 2.0 : 2.0 * rng.uniform();
    const Point ref = brute_force_step_integral(path, ms, f, t);
    worst = std::max(worst, (integrate_step(path, ms, f, t) - ref).cwiseAbs().maxCoeff());
    worst = std::max(worst, (integrate_field(path, ms, f.as_field(marks), t) - ref).cwiseAbs().maxCoeff());
  }
  Notes n;
  n.add("1000 pairs, max abs error %.2e (tol 1e-12)", worst);
  return {worst <= 1e-12, n.str()};
}

// A2 -----------------------------------------------------------------------
Outcome martingale_property() {
  std::vector<std::pair<MarkSpace, FieldIntegrand>> cases;
  for (const auto& scn : catalog(64)) cases.emplace_back(scn.marks(), scn.integrand());
  cases.emplace_back(MarkSpace({4.0}), FieldIntegrand::constant({vec({1.0})}));
  cases.emplace_back(MarkSpace({0.2, 5.0}),
                     FieldIntegrand::polynomial({poly_coeffs({{0.0, 1.0}, {0.0, 0.0}, {0.0, 0.0}, {3.0, -4.0}}),
                                                 poly_coeffs({{1.0, 1.0}, {-1.0, 0.5}})}));
  cases.emplace_back(MarkSpace({1.0, 1.0, 1.0}),
                     StepIntegrand({0.0, 0.1, 0.2, 0.5, 0.9, 1.0},
                                   {{{MarkSet::all(3), vec({1.0, 2.0, 3.0})}},
                                    {{MarkSet::only(3, 0), vec({-1.0, 0.0, 0.0})}},
                                    {{MarkSet::of(3, {1, 2}), vec({0.0, 5.0, -5.0})}},
                                    {{MarkSet::only(3, 2), vec({2.0, 2.0, 2.0})}, {MarkSet::only(3, 0), vec({0.5, 0.0, 0.0})}},
                                    {{MarkSet::all(3), vec({-3.0, 1.0, 0.0})}}})
                         .as_field(3));
  cases.emplace_back(MarkSpace({2.0, 0.7}), sinusoid({vec({1.0, -1.0, 0.5}), vec({0.0, 2.0, 1.0})}, 17.0, 1.0));
  cases.emplace_back(MarkSpace({10.0}), sinusoid({vec({0.1, 0.2})}, 0.5, -0.2));
  const std::size_t m = 100000;
  double worst = 0.0;
  int bad = 0;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const auto& [ms, f] = cases[c];
    const double t = c % 2 == 0 ? 1.0 : 0.6;
    const Point comp = field_compensator(ms, f, 0.0, t, 1.0 / 4096.0);
    const auto d = static_cast<Eigen::Index>(f.dim());
    Point s = Point::Zero(d), s2 = Point::Zero(d);
    for (std::size_t i = 0; i < m; ++i) {
      const PoissonPath path = sample_path(ms, 1.0, Rng::substream(0xa2 + c, i));
      Point v = -comp;
      for (const auto& e : path.prefix(t)) v += f(e.time, e.mark);
      s += v;
      s2 += v.cwiseProduct(v);
    }
    const double mm = static_cast<double>(m);
    for (Eigen::Index k = 0; k < d; ++k) {
      const double mean = s[k] / mm;
      const double se = std::sqrt(std::max(0.0, s2[k] / mm - mean * mean) / (mm - 1.0));
      const double z = se > 0.0 ? std::abs(mean) / se : 0.0;
      worst = std::max(worst, z);
      bad += z > 4.0;
    }
  }
  Notes n;
  n.add("10 scenarios x 1e5 paths, max |mean|/stderr %.2f (tol 4)", worst);
  return {bad == 0, n.str()};
}

// A3 -----------------------------------------------------------------------
Outcome ito_bound() {
  Notes n;
  bool ok = true;
  const auto scns = catalog(64);
  for (std::size_t idx : {0u, 3u}) {
    const IsometryReport h = ito_isometry_report(experiment(scns[idx], 2.0, 100000, 0xa3));
    ok = ok && h.hilbert && std::abs(h.z_score) <= 4.0;
    n.add("%s z=%.2f", scns[idx].id().c_str(), h.z_score);
  }
  for (std::size_t idx : {1u, 4u}) {
    const IsometryReport a = ito_isometry_report(experiment(scns[idx], 2.0, 10000, 0xa3));
    const IsometryReport b = ito_isometry_report(experiment(scns[idx], 2.0, 20000, 0xa3));
    const double drift = drift_factor(a.report.ratio_hat, b.report.ratio_hat);
    ok = ok && a.report.finite() && b.report.finite() && drift < 2.0;
    n.add("%s ratio %.4f -> %.4f", scns[idx].id().c_str(), a.report.ratio_hat, b.report.ratio_hat);
  }
  return {ok, n.str()};
}

// A4 -----------------------------------------------------------------------
Outcome maximal_inequality() {
  const SmoothSpace sp(4, 4, 4, 2);
  const MarkSpace ms({1.5, 1.0, 0.5});
  Matrix skew = Matrix::Zero(4, 4), tri = -2.0 * Matrix::Identity(4, 4);
  for (int i = 0; i < 4; ++i) {
    skew(i, (i + 1) % 4) += 0.5;
    skew((i + 1) % 4, i) -= 0.5;
    if (i > 0) tri(i, i - 1) = 1.0;
  }
  skew -= Matrix::Identity(4, 4);
  const std::vector<std::pair<std::string, Generator>> gens{
      {"identity", Generator::identity(4)},
      {"diagonal", Generator::diagonal({0.0, -0.5, -1.0, -4.0})},
      {"laplacian", Generator::dirichlet_laplacian(4, 1.0)},
      {"dense-skew", Generator::dense(skew)},
      {"dense-shift", Generator::dense(tri)}};
  const std::vector<std::pair<std::string, FieldIntegrand>> fields{
      {"constant", FieldIntegrand::constant({vec({1.0, 0.0, 0.0, 0.5}), vec({0.0, -1.0, 1.0, 0.0}), vec({2.0, 2.0, 0.0, 0.0})})},
      {"polynomial", FieldIntegrand::polynomial({poly_coeffs({{1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0}}),
                                                 poly_coeffs({{0.0, 0.0, 1.0, -1.0}}),
                                                 poly_coeffs({{0.5, 0.5, 0.5, 0.5}, {0.0, 0.0, 0.0, 0.0}, {-1.0, 0.0, 1.0, 0.0}})})},
      {"sinusoid", sinusoid({vec({1.0, 0.0, 1.0, 0.0}), vec({0.0, 1.0, 0.0, 1.0}), vec({1.0, 1.0, -1.0, -1.0})}, 7.0, 0.2)},
      {"step", StepIntegrand({0.0, 0.25, 0.6, 1.0},
                             {{{MarkSet::all(3), vec({1.0, 1.0, 0.0, 0.0})}},
                              {{MarkSet::only(3, 0), vec({0.0, 0.0, 2.0, 0.0})}, {MarkSet::of(3, {1, 2}), vec({-1.0, 0.0, 0.0, 1.0})}},
                              {{MarkSet::only(3, 2), vec({0.0, 3.0, 0.0, 0.0})}}})
                   .as_field(3)}};
  const std::vector<double> qps{0.5, sp.p(), sp.q(), 2.0 * sp.q()};
  const std::vector<Mode> modes{Mode::thm4_6, Mode::thm4_9, Mode::cor4_10};
  std::size_t rows = 0, bad_finite = 0, bad_stable = 0, bad_scale = 0;
  double worst_drift = 1.0, worst_scale = 0.0;
  for (const auto& [gname, gen] : gens) {
    for (const auto& [fname, xi] : fields) {
      const ConvolutionScenario scn(gname + "/" + fname, ms, sp, gen, xi, 1.0);
      const ConvolutionEngine engine(scn);
      const PathStatistics big = simulate_paths(engine, {10000, 0xa4, 1.0, {}, g_jobs});
      const PathStatistics small = head(big, 1000);
      std::vector<std::pair<ConvolutionScenario, PathStatistics>> scaled;
      for (double c : {0.125, 8.0}) {
        ConvolutionScenario s2 = scn.with_integrand(xi.scaled(c));
        const ConvolutionEngine e2(s2);
        PathStatistics st = simulate_paths(e2, {1000, 0xa4, 1.0, {}, g_jobs});
        scaled.emplace_back(std::move(s2), std::move(st));
      }
      for (Mode mode : modes) {
        for (double qp : qps) {
          if (mode == Mode::thm4_6 && qp < sp.q()) continue;
          if (mode == Mode::cor4_10 && qp > sp.p()) continue;
          ++rows;
          const InequalityReport r10k = inequality_report(big, experiment(scn, qp, 10000, 0xa4), mode);
          const InequalityReport r1k = inequality_report(small, experiment(scn, qp, 1000, 0xa4), mode);
          bad_finite += !(r10k.finite() && r1k.finite());
          const double drift = drift_factor(r10k.ratio_hat, r1k.ratio_hat);
          worst_drift = std::max(worst_drift, drift);
          bad_stable += !(drift < 2.0);
          for (const auto& [s2, sc] : scaled) {
            const InequalityReport rs = inequality_report(sc, experiment(s2, qp, 1000, 0xa4), mode);
            const double rel = std::abs(rs.ratio_hat - r1k.ratio_hat) / r1k.ratio_hat;
            worst_scale = std::max(worst_scale, rel);
            bad_scale += !(rel <= 1e-12);
          }
        }
      }
    }
  }
  Notes n;
  n.add("%zu rows over 5x4 scenarios", rows);
  n.add("non-finite %zu", bad_finite);
  n.add("worst M drift %.3fx (tol 2x)", worst_drift);
  n.add("worst scale deviation %.1e (tol 1e-12)", worst_scale);
  return {bad_finite == 0 && bad_stable == 0 && bad_scale == 0, n.str()};
}

// A5 -----------------------------------------------------------------------
Outcome strong_solution() {
  const double a = 1.3, c = 0.7, nu = 4.0;
  const ConvolutionScenario base = scalar_decay(a, c, nu, 1.0, 4096);
  std::vector<std::size_t> counts{512, 1024, 2048, 4096};
  std::vector<double> mean(counts.size(), 0.0);
  double worst_fine = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const ConvolutionEngine engine(base.with_grid(GridSpec{counts[k], {}}));
    for (std::uint64_t s = 0; s < 20; ++s) {
      const double r = strong_solution_residual(engine, sample_path(base.marks(), 1.0, Rng::substream(0xa5, s)));
      mean[k] += r / 20.0;
      if (counts[k] == 4096) worst_fine = std::max(worst_fine, r);
    }
  }
  // Least-squares slope of log2(residual) against log2(h).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double x = -std::log2(static_cast<double>(counts[k])), y = std::log2(mean[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double nk = static_cast<double>(counts.size());
  const double slope = (nk * sxy - sx * sy) / (nk * sxx - sx * sx);
  const ConvolutionScenario id = scalar_decay(0.0, c, nu, 1.0, 4096);
  double worst_id = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s)
    worst_id = std::max(worst_id, strong_solution_residual(id, sample_path(id.marks(), 1.0, Rng::substream(0xa5, s))));
  Notes n;
  n.add("max residual at T/4096 %.2e (tol 1e-6)", worst_fine);
  n.add("slope %.3f in [1.7, 2.3]", slope);
  n.add("identity residual %.1e (tol 1e-12)", worst_id);
  return {worst_fine < 1e-6 && slope >= 1.7 && slope <= 2.3 && worst_id <= 1e-12, n.str()};
}

// A6 -----------------------------------------------------------------------
Outcome ito_decomposition() {
  std::size_t bad_gap = 0, bad_ineq = 0, bad_drift = 0, total = 0;
  double worst_ratio = 0.0;
  for (const auto& scn : catalog(1024)) {
    const ConvolutionEngine engine(scn);
    for (std::uint64_t s = 0; s < 200; ++s) {
      const ItoTerms it = ito_terms(engine, sample_path(scn.marks(), 1.0, Rng::substream(0xa6, s)), 1.0);
      ++total;
      const double ratio = it.tolerance > 0.0 ? std::abs(it.identity_gap()) / it.tolerance : 0.0;
      worst_ratio = std::max(worst_ratio, ratio);
      bad_gap += !(std::abs(it.identity_gap()) <= 10.0 * it.tolerance);
      bad_ineq += !(it.phi_u_t <= it.mart_term + it.jump_term + it.tolerance);
      bad_drift += !(it.drift_term <= 1e-9 * (1.0 + it.sup_phi));
    }
  }
  Notes n;
  n.add("%zu paths over 5 scenarios", total);
  n.add("worst |gap|/tol %.2e (tol 10)", worst_ratio);
  n.add("inequality failures %zu", bad_ineq);
  n.add("positive drift %zu", bad_drift);
  return {bad_gap == 0 && bad_ineq == 0 && bad_drift == 0, n.str()};
}

// A7 -----------------------------------------------------------------------
Outcome yosida_scheme() {
  const GridSpec grid{1024, {}};
  Matrix rot(2, 2);
  rot << -0.5, -0.4, 0.4, -0.5;
  std::vector<ConvolutionScenario> scns;
  scns.push_back(scalar_decay(0.5, 1.0, 3.0, 1.0, 1024));
  scns.emplace_back("diagonal-l4", MarkSpace({2.0, 1.0}), SmoothSpace(3, 4, 4, 2), Generator::diagonal({-0.2, -0.5, -0.9}),
                    FieldIntegrand::polynomial({poly_coeffs({{1.0, 0.0, 1.0}, {0.0, 1.0, 0.0}}), poly_coeffs({{0.0, 1.0, -1.0}})}),
                    1.0, grid);
  scns.emplace_back("laplacian-l2", MarkSpace({1.0, 2.0}), SmoothSpace(4, 2, 2, 2), Generator::dirichlet_laplacian(4, 0.2),
                    sinusoid({vec({1.0, 0.5, -0.5, 0.0}), vec({0.0, 1.0, 1.0, -1.0})}, 5.0, 0.3), 1.0, grid);
  scns.emplace_back("dense-l2", MarkSpace({3.0}), SmoothSpace(2, 2, 2, 2), Generator::dense(rot),
                    FieldIntegrand::polynomial({poly_coeffs({{1.0, 0.0}, {-1.0, 2.0}})}), 1.0, grid);
  scns.emplace_back("identity-l2", MarkSpace({1.5, 0.75}), SmoothSpace(2, 2, 2, 2), Generator::identity(2),
                    FieldIntegrand::constant({vec({1.0, -0.5}), vec({0.25, 2.0})}), 1.0, grid);
  bool ok = true;
  double worst_final = 0.0;
  for (const auto& scn : scns) {
    for (std::uint64_t s = 0; s < 3; ++s) {
      const PoissonPath path = sample_path(scn.marks(), 1.0, Rng::substream(0xa7, s));
      const CadlagPath u = convolution_path(scn, path);
      const double sup = u.sup_norm(scn.space());
      double prev = std::numeric_limits<double>::infinity();
      for (int k = 1; k <= 10; ++k) {
        const double d = sup_distance(scn.space(), yosida_convolution(scn, path, std::ldexp(1.0, k)), u);
        if (!(d < prev || (d == 0.0 && prev == 0.0))) ok = false;
        prev = d;
      }
      if (sup > 0.0) worst_final = std::max(worst_final, prev / sup);
      ok = ok && prev < 1e-3 * sup + (sup == 0.0 ? 1e-300 : 0.0);
    }
  }
  const double a = 0.5;
  const ConvolutionScenario& sd = scns[0];
  const PoissonPath path = sample_path(sd.marks(), 1.0, 0xa7);
  const CadlagPath u = convolution_path(sd, path);
  double worst_factor = 0.0;
  for (int k = 1; k <= 10; ++k) {
    const double n = std::ldexp(1.0, k);
    const CadlagPath un = yosida_convolution(sd, path, n);
    for (std::size_t i = 0; i < u.size(); ++i)
      worst_factor = std::max(worst_factor, std::abs(un.values()[i][0] - n / (n + a) * u.values()[i][0]));
  }
  Notes nt;
  nt.add("5 scenarios x 3 paths, worst final distance / sup|u| %.2e (tol 1e-3)", worst_final);
  nt.add("-aI scale factor error %.1e (tol 1e-12)", worst_factor);
  return {ok && worst_factor <= 1e-12, nt.str()};
}

// A8 -----------------------------------------------------------------------
Outcome stopped_variant() {
  const ConvolutionScenario scn = catalog(1024)[1];
  const ConvolutionEngine engine(scn);
  const double p = scn.space().p();
  const PathStatistics free_run = simulate_paths(engine, {1000, 0xa8, 1.0, {}, g_jobs});
  const double max_noise = *std::max_element(free_run.noise.begin(), free_run.noise.end());
  ExperimentConfig cfg = experiment(scn, scn.space().q(), 1000, 0xa8);
  cfg.lambda_threshold = 2.0 * std::pow(max_noise, 1.0 / p);
  const StoppedReport s = stopped_report(cfg);
  const InequalityReport u = inequality_report(free_run, cfg, Mode::thm4_9);
  bool identical = s.n_stopped == 0;
  for (auto [a, b] : {std::pair{s.report.lhs_mean, u.lhs_mean}, {s.report.lhs_stderr, u.lhs_stderr},
                      {s.report.rhs_mean, u.rhs_mean}, {s.report.rhs_stderr, u.rhs_stderr},
                      {s.report.ratio_hat, u.ratio_hat}, {s.report.ratio_ci_lo, u.ratio_ci_lo},
                      {s.report.ratio_ci_hi, u.ratio_ci_hi}})
    identical = identical && same_bits(a, b);

  const double lambda = std::pow(max_noise, 1.0 / p) / 3.0;
  const double threshold = std::pow(lambda, p);
  const PathStatistics st = simulate_paths(engine, {1000, 0xa8, 1.0, lambda, g_jobs});
  std::size_t mismatches = 0, pre_violations = 0, stopped = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const PoissonPath path = sample_path(scn.marks(), 1.0, Rng::substream(0xa8, i));
    std::int64_t first = -1;
    double acc = 0.0;
    for (std::size_t k = 0; k < path.size(); ++k) {
      const Event& e = path.events()[k];
      acc += std::pow(norm(scn.space(), scn.integrand()(e.time, e.mark)), p);
      if (acc > threshold) {
        first = static_cast<std::int64_t>(k);
        break;
      }
    }
    mismatches += st.tau_index[i] != first;
    if (first >= 0) {
      ++stopped;
      pre_violations += !(st.noise_before_tau[i] <= threshold);
    }
  }
  ExperimentConfig low = cfg;
  low.lambda_threshold = lambda;
  const StoppedReport sl = stopped_report(low);
  Notes n;
  n.add("lambda above max: %s", identical ? "bit-identical" : "DIFFERENT");
  n.add("tau mismatches %zu / 1000 (%zu stopped)", mismatches, stopped);
  n.add("pre-tau violations %zu", pre_violations);
  const bool flags = sl.pre_tau_bounded && sl.truncation_bounded && sl.left_limit_consistent;
  return {identical && mismatches == 0 && pre_violations == 0 && stopped > 0 && flags, n.str()};
}

// A9 -----------------------------------------------------------------------
Outcome higher_moments() {
  const double lam = 2.5;
  ExperimentConfig sc = experiment(scalar_decay(0.0, 1.0, lam, 1.0, 64), 2.0, 100000, 0xa9);
  sc.moment_level = 2;
  const HigherMomentReport h = higher_moment_report(sc);
  const double exact = lam + 3.0 * lam * lam;
  const double z = (h.scalar_terminal.mean - exact) / h.scalar_terminal.std_error;
  bool ok = std::abs(z) <= 4.0;
  Notes n;
  n.add("E|N-lt|^4 %.4f vs %.4f (z=%.2f)", h.scalar_terminal.mean, exact, z);
  double worst = 1.0;
  const auto scns = catalog(1024);
  for (std::size_t idx : {1u, 2u, 3u}) {
    ExperimentConfig a = experiment(scns[idx], 2.0, 1000, 0xa9), b = experiment(scns[idx], 2.0, 10000, 0xa9);
    a.moment_level = b.moment_level = 2;
    const HigherMomentReport ha = higher_moment_report(a), hb = higher_moment_report(b);
    for (auto [x, y] : {std::pair{&ha.vector_report, &hb.vector_report}, {&ha.scalar_report, &hb.scalar_report}}) {
      ok = ok && x->finite() && y->finite();
      const double d = drift_factor(x->ratio_hat, y->ratio_hat);
      worst = std::max(worst, d);
      ok = ok && d < 2.0;
    }
  }
  n.add("vector and scalar sub-reports finite, worst M drift %.3fx (tol 2x)", worst);
  return {ok, n.str()};
}

// A10 ----------------------------------------------------------------------
Outcome layer_cake() {
  bool ok = true;
  double worst = 0.0;
  const std::size_t levels = 200;
  for (const auto& scn : catalog(1024)) {
    const ConvolutionEngine engine(scn);
    const PathStatistics st = simulate_paths(engine, {10000, 0xa10, 1.0, {}, g_jobs});
    for (double qp : {0.5, 2.0, scn.space().q()}) {
      const LayerCakeReport lc = layer_cake_check(st.sup_norm, qp, levels);
      // The tail sum is the sample mean of a per-path step function of the
      // sample; its standard error follows from those per-path values.
      const double top = *std::max_element(st.sup_norm.begin(), st.sup_norm.end());
      std::vector<double> per(st.size(), 0.0);
      double lo_pow = 0.0;
      for (std::size_t j = 1; j <= levels; ++j) {
        const double lo = top * static_cast<double>(j - 1) / static_cast<double>(levels);
        const double hi = j == levels ? top : top * static_cast<double>(j) / static_cast<double>(levels);
        const double hi_pow = std::pow(hi, qp);
        for (std::size_t i = 0; i < st.size(); ++i)
          if (st.sup_norm[i] > lo) per[i] += hi_pow - lo_pow;
        lo_pow = hi_pow;
      }
      const Estimate tail = sample_estimate(per);
      const double combined = std::hypot(lc.direct_stderr, tail.std_error);
      const double z = std::abs(lc.tail_estimate - lc.direct_mean) / combined;
      ok = ok && std::abs(tail.mean - lc.tail_estimate) <= 1e-9 * lc.tail_estimate && z <= 4.0;
      worst = std::max(worst, z);
    }
  }
  Notes n;
  n.add("5 scenarios x q' in {0.5, 2, q}, worst |tail - direct| / combined stderr %.3f (tol 4)", worst);
  return {ok, n.str()};
}

// A11 ----------------------------------------------------------------------
Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / ("jumpconv-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "verify.yaml";
  std::ofstream(cfg) << "schema: jumpconv/1\nid: determinism\nseed: 1234\nhorizon: 1.0\n"
                        "marks: {weights: [1.0, 2.0]}\nspace: {dim: 3, r: 4, q: 4, p: 2}\n"
                        "generator: {kind: dirichlet_laplacian, scale: 1.0}\n"
                        "integrand: {kind: sinusoid, amplitude: [[1, 0, 1], [0, 1, -1]], frequency: 4}\n"
                        "grid: {count: 256}\n"
                        "verify:\n  modes: [thm4_9, cor4_10, stopped, layer_cake, ito_isometry]\n"
                        "  q_prime: [0.5, 1, 2]\n  n_paths: 1000\n  lambda: 1.5\n";
  std::ostringstream sink;
  const int a = run_cli({"verify", "--config", cfg.string(), "--out", (root / "a").string(), "--jobs", "1"}, sink, sink);
  const int b = run_cli({"verify", "--config", cfg.string(), "--out", (root / "b").string(),
                         "--jobs", std::to_string(std::max(2u, g_jobs))},
                        sink, sink);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  bool same = a == 0 && b == 0;
  std::size_t bytes = 0;
  for (const char* f : {"summary.json", "reports.csv", "diagnostics.json"}) {
    const std::string x = slurp(root / "a" / f), y = slurp(root / "b" / f);
    same = same && !x.empty() && x == y;
    bytes += x.size();
  }
  fs::remove_all(root);
  Notes n;
  n.add("two verify runs (different worker counts): %s, %zu bytes compared", same ? "identical" : "DIFFERENT", bytes);
  return {same, n.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"jumpconv acceptance criteria"};
  std::vector<std::string> only;
  app.add_option("--jobs", g_jobs, "worker threads")->check(CLI::Range(1u, 256u));
  app.add_option("--only", only, "run only the named criteria (A1 ... A11)");
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    const char* id;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"A1", 10, exact_oracle},        {"A2", 60, martingale_property}, {"A3", 60, ito_bound},
      {"A4", 600, maximal_inequality}, {"A5", 30, strong_solution},     {"A6", 60, ito_decomposition},
      {"A7", 60, yosida_scheme},       {"A8", 30, stopped_variant},     {"A9", 120, higher_moments},
      {"A10", 60, layer_cake},         {"A11", 10, determinism}};
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%-3s %s  %s; %.1fs (budget %.0fs)%s\n", c.id, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
                c.budget_s, in_time ? "" : " OVER BUDGET");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
