#include "jumpconv/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "jumpconv/config.hpp"
#include "jumpconv/csv.hpp"
#include "jumpconv/errors.hpp"
#include "jumpconv/verify.hpp"

namespace jumpconv {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::uint64_t resolve_seed(const RunManifest& m, const RunConfig& cfg) {
  if (m.seed) return *m.seed;
  if (cfg.seed) return *cfg.seed;
  if (const char* env = std::getenv("JUMPCONV_SEED"); env && *env) {
    const std::string s(env);
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ConfigError("JUMPCONV_SEED must be a 64-bit unsigned integer, got '" + s + "'");
    return v;
  }
  return 0;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
}

/// Writes through a temporary file and renames, so readers never see a
/// partial file.
void write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "'");
}

const char* const report_columns[] = {"scenario_id", "mode",       "p",           "q",           "q_prime",
                                      "n_paths",     "lhs_mean",   "lhs_stderr",  "rhs_mean",    "rhs_stderr",
                                      "ratio_hat",   "ratio_ci_lo", "ratio_ci_hi", "wall_ms"};

ojson number_or_null(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

ojson report_json(const InequalityReport& r, bool timing) {
  ojson j;
  j["scenario_id"] = r.scenario_id;
  j["mode"] = r.mode;
  j["p"] = number_or_null(r.p);
  j["q"] = number_or_null(r.q);
  j["q_prime"] = number_or_null(r.q_prime);
  j["n_paths"] = r.n_paths;
  j["lhs_mean"] = number_or_null(r.lhs_mean);
  j["lhs_stderr"] = number_or_null(r.lhs_stderr);
  j["rhs_mean"] = number_or_null(r.rhs_mean);
  j["rhs_stderr"] = number_or_null(r.rhs_stderr);
  j["ratio_hat"] = number_or_null(r.ratio_hat);
  j["ratio_ci_lo"] = number_or_null(r.ratio_ci_lo);
  j["ratio_ci_hi"] = number_or_null(r.ratio_ci_hi);
  j["wall_ms"] = timing ? number_or_null(r.wall_ms) : ojson(nullptr);
  return j;
}

void report_cells(csv::RowWriter& w, const InequalityReport& r, bool timing) {
  w.cell(r.scenario_id).cell(r.mode).cell(r.p).cell(r.q).cell(r.q_prime).cell(r.n_paths);
  w.cell(r.lhs_mean).cell(r.lhs_stderr).cell(r.rhs_mean).cell(r.rhs_stderr);
  w.cell(r.ratio_hat).cell(r.ratio_ci_lo).cell(r.ratio_ci_hi);
  if (timing) {
    w.cell(r.wall_ms);
  } else {
    w.cell(std::string_view{});
  }
}

ojson estimate_json(const Estimate& e) { return ojson{{"mean", number_or_null(e.mean)}, {"stderr", number_or_null(e.std_error)}}; }

bool is_ratio_mode(const std::string& mode) { return mode == "thm4_6" || mode == "thm4_9" || mode == "cor4_10"; }

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int cmd_sample(const RunManifest& m, std::ostream& log) {
  const RunConfig cfg = load_config(m.config_path);
  const std::uint64_t seed = resolve_seed(m, cfg);
  const SampleSection sec = cfg.sample.value_or(SampleSection{});
  ensure_dir(m.out_dir);
  std::optional<ConvolutionEngine> engine;
  if (sec.convolution) engine.emplace(cfg.scenario());
  for (std::size_t i = 0; i < sec.n_paths; ++i) {
    Rng rng = Rng::substream(seed, i);
    const PoissonPath path = sample_path(*cfg.marks, cfg.horizon, rng);
    std::ostringstream os;
    write_path_csv(os, path);
    write_file(fs::path(m.out_dir) / ("path_" + std::to_string(i) + ".csv"), os.str());
    if (engine) {
      std::ostringstream cs;
      convolution_path(*engine, path).write_csv(cs);
      write_file(fs::path(m.out_dir) / ("convolution_" + std::to_string(i) + ".csv"), cs.str());
    }
    if (path.collisions() > 0)
      log << "warning: path " << i << " had " << path.collisions() << " time collision(s) nudged by one ulp\n";
  }
  log << "wrote " << sec.n_paths << " path(s) to " << m.out_dir << "\n";
  return exit_code::ok;
}

int cmd_verify(const RunManifest& m, std::ostream& log) {
  const RunConfig cfg = load_config(m.config_path);
  if (!cfg.verify) throw ConfigError(cfg.source + ": missing section 'verify'");
  const VerifySection& sec = *cfg.verify;
  const std::uint64_t seed = resolve_seed(m, cfg);
  const ConvolutionScenario scn = cfg.scenario();

  ExperimentConfig base{scn};
  base.n_paths = sec.n_paths;
  base.base_seed = seed;
  base.t_eval = sec.t_eval;
  base.lambda_threshold = sec.lambda;
  base.moment_level = sec.moment_level;
  base.jobs = m.jobs;
  base.q_prime = sec.q_prime.empty() ? scn.space().p() : sec.q_prime.front();
  try {
    base.validate();
  } catch (const DomainError& e) {
    throw ConfigError(cfg.source + ": " + e.what());
  }
  // Every gated hypothesis is checked before any work is done.
  for (const auto& mode : sec.modes)
    if (is_ratio_mode(mode))
      for (double qp : sec.q_prime) check_hypothesis(parse_mode(mode), qp, scn.space());

  ensure_dir(m.out_dir);
  std::vector<InequalityReport> rows;
  ojson diagnostics = ojson::object();
  std::optional<PathStatistics> stats;
  auto shared_stats = [&]() -> const PathStatistics& {
    if (!stats) {
      const ConvolutionEngine engine(scn);
      stats = simulate_paths(engine, {base.n_paths, base.base_seed, base.eval_time(), base.lambda_threshold, base.jobs});
    }
    return *stats;
  };

  for (const auto& mode : sec.modes) {
    if (is_ratio_mode(mode)) {
      for (double qp : sec.q_prime) {
        ExperimentConfig c = base;
        c.q_prime = qp;
        rows.push_back(inequality_report(shared_stats(), c, parse_mode(mode)));
      }
    } else if (mode == "stopped") {
      const StoppedReport s = stopped_report(shared_stats(), base);
      rows.push_back(s.report);
      diagnostics["stopped"] = {{"lambda", *base.lambda_threshold},
                                {"n_stopped", s.n_stopped},
                                {"pre_tau_bounded", s.pre_tau_bounded},
                                {"truncation_bounded", s.truncation_bounded},
                                {"left_limit_consistent", s.left_limit_consistent}};
    } else if (mode == "layer_cake") {
      ojson list = ojson::array();
      for (double qp : sec.q_prime) {
        const LayerCakeReport lc = layer_cake_check(shared_stats().sup_norm, qp, sec.layer_cake_levels);
        InequalityReport r;
        r.scenario_id = scn.id();
        r.mode = "layer_cake";
        r.p = scn.space().p();
        r.q = scn.space().q();
        r.q_prime = qp;
        r.n_paths = base.n_paths;
        r.lhs_mean = lc.direct_mean;
        r.lhs_stderr = lc.direct_stderr;
        r.rhs_mean = lc.tail_estimate;
        r.rhs_stderr = lc.quadrature_bound;
        if (lc.direct_mean == 0.0 && lc.tail_estimate == 0.0) {
          r.ratio_hat = r.ratio_ci_lo = r.ratio_ci_hi = 0.0;
        } else {
          r.ratio_hat = lc.direct_mean / lc.tail_estimate;
          const double half = (4.0 * lc.direct_stderr + lc.quadrature_bound) / lc.tail_estimate;
          r.ratio_ci_lo = r.ratio_hat - half;
          r.ratio_ci_hi = r.ratio_hat + half;
        }
        r.wall_ms = shared_stats().wall_ms;
        rows.push_back(r);
        list.push_back({{"q_prime", qp}, {"agree", lc.agree}, {"quadrature_bound", lc.quadrature_bound}});
      }
      diagnostics["layer_cake"] = list;
    } else if (mode == "higher_moment") {
      const HigherMomentReport h = higher_moment_report(base);
      rows.push_back(h.vector_report);
      rows.push_back(h.scalar_report);
      diagnostics["higher_moment"] = {{"level", *base.moment_level},
                                      {"terminal", estimate_json(h.terminal)},
                                      {"scalar_terminal", estimate_json(h.scalar_terminal)}};
    } else if (mode == "ito_isometry") {
      const IsometryReport iso = ito_isometry_report(base);
      rows.push_back(iso.report);
      diagnostics["ito_isometry"] = {{"hilbert", iso.hilbert},
                                     {"z_score", number_or_null(iso.z_score)},
                                     {"equality_holds", iso.equality_holds}};
    } else if (mode == "step_approx") {
      const StepApproxReport sa = step_approx_convergence(base, sec.step_refinements);
      for (const auto& lv : sa.levels) {
        InequalityReport r;
        r.scenario_id = scn.id() + "/level=" + std::to_string(lv.level);
        r.mode = "step_approx";
        r.p = scn.space().p();
        r.q = scn.space().q();
        r.q_prime = scn.space().p();
        r.n_paths = base.n_paths;
        r.lhs_mean = lv.integral_gap.mean;
        r.lhs_stderr = lv.integral_gap.std_error;
        r.rhs_mean = lv.distance;
        r.rhs_stderr = 0.0;
        r.ratio_hat = lv.ratio;
        const double half = lv.distance > 0.0 ? 2.5758293035489004 * lv.integral_gap.std_error / lv.distance : 0.0;
        r.ratio_ci_lo = r.ratio_hat - half;
        r.ratio_ci_hi = r.ratio_hat + half;
        rows.push_back(r);
      }
    }
  }

  ojson summary = ojson::array();
  std::ostringstream csv_out;
  csv::RowWriter w(csv_out);
  for (const char* c : report_columns) w.cell(std::string_view(c));
  w.end();
  bool all_finite = true;
  for (const auto& r : rows) {
    summary.push_back(report_json(r, m.record_timing));
    report_cells(w, r, m.record_timing);
    w.end();
    if (!r.finite()) {
      all_finite = false;
      log << "error: non-finite statistic in " << r.scenario_id << " (" << r.mode << ", q'=" << r.q_prime << ")\n";
    }
  }
  write_file(fs::path(m.out_dir) / "summary.json", summary.dump(2) + "\n");
  write_file(fs::path(m.out_dir) / "reports.csv", csv_out.str());
  write_file(fs::path(m.out_dir) / "diagnostics.json", diagnostics.dump(2) + "\n");
  log << "wrote " << rows.size() << " report(s) to " << m.out_dir << "\n";
  return all_finite ? exit_code::ok : exit_code::non_finite;
}

int cmd_sweep(const RunManifest& m, std::ostream& log) {
  const RunConfig cfg = load_config(m.config_path);
  if (!cfg.sweep) throw ConfigError(cfg.source + ": missing section 'sweep'");
  const SweepSection& sec = *cfg.sweep;
  if (sec.generators.empty() || sec.integrands.empty() || sec.q_prime.empty() || sec.p.empty())
    throw ConfigError(cfg.source + ": sweep grid is empty");
  if (!cfg.space) throw ConfigError(cfg.source + ": missing section 'space'");
  const std::uint64_t seed = resolve_seed(m, cfg);
  const Mode mode = parse_mode(sec.mode);
  for (double p : sec.p)
    for (double qp : sec.q_prime) check_hypothesis(mode, qp, cfg.space->with_p(p));

  ensure_dir(m.out_dir);
  const fs::path progress_path = fs::path(m.out_dir) / "sweep.progress.csv";
  const std::string fingerprint = [&] {
    std::uint64_t h = fnv1a(read_text(m.config_path));
    h = fnv1a(std::to_string(seed), h);
    h = fnv1a(m.record_timing ? "timing" : "", h);
    return "# jumpconv sweep progress " + std::to_string(h);
  }();

  // Completed groups from an earlier, possibly interrupted, run.
  std::map<std::string, std::vector<std::string>> done;
  {
    std::string text = read_text(progress_path);
    const auto last_nl = text.rfind('\n');
    text = last_nl == std::string::npos ? std::string() : text.substr(0, last_nl + 1);
    std::istringstream in(text);
    std::string line;
    bool valid = std::getline(in, line) && line == fingerprint + "\r";
    while (valid && std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto comma = line.find(',');
      if (comma == std::string::npos) continue;
      done[line.substr(0, comma)].push_back(line.substr(comma + 1));
    }
    if (!valid) done.clear();
  }
  {
    std::ostringstream fresh;
    fresh << fingerprint << "\r\n";
    for (const auto& [key, rows] : done)
      if (rows.size() == sec.q_prime.size())
        for (const auto& r : rows) fresh << key << "," << r << "\r\n";
    write_file(progress_path, fresh.str());
  }
  std::ofstream progress(progress_path, std::ios::binary | std::ios::app);
  if (!progress) throw IoError("cannot append to '" + progress_path.string() + "'");

  std::vector<std::string> all_rows;
  bool all_finite = true;
  std::size_t reused = 0;
  for (const auto& [gname, gen] : sec.generators) {
    for (const auto& [fname, xi] : sec.integrands) {
      for (double p : sec.p) {
        const std::string id = cfg.id + "/" + gname + "/" + fname + "/p=" + csv::number(p);
        if (auto it = done.find(id); it != done.end() && it->second.size() == sec.q_prime.size()) {
          all_rows.insert(all_rows.end(), it->second.begin(), it->second.end());
          ++reused;
          continue;
        }
        const SmoothSpace sp = cfg.space->with_p(p);
        const ConvolutionScenario scn(id, *cfg.marks, sp, gen, xi, cfg.horizon, cfg.grid, cfg.quadrature);
        ExperimentConfig base{scn};
        base.n_paths = sec.n_paths;
        base.base_seed = seed;
        base.t_eval = sec.t_eval;
        base.jobs = m.jobs;
        try {
          base.validate();
        } catch (const DomainError& e) {
          throw ConfigError(cfg.source + ": " + e.what());
        }
        const ConvolutionEngine engine(scn);
        const PathStatistics st = simulate_paths(engine, {base.n_paths, seed, base.eval_time(), {}, m.jobs});
        std::ostringstream block;
        for (double qp : sec.q_prime) {
          ExperimentConfig c = base;
          c.q_prime = qp;
          const InequalityReport r = inequality_report(st, c, mode);
          if (!r.finite()) {
            all_finite = false;
            log << "error: non-finite statistic in " << id << " (q'=" << qp << ")\n";
          }
          std::ostringstream row;
          csv::RowWriter w(row);
          w.cell(r.scenario_id).cell(gname).cell(fname).cell(r.mode).cell(r.p).cell(r.q).cell(r.q_prime);
          w.cell(sp.r()).cell(sp.dim()).cell(r.n_paths);
          w.cell(r.lhs_mean).cell(r.lhs_stderr).cell(r.rhs_mean).cell(r.rhs_stderr);
          w.cell(r.ratio_hat).cell(r.ratio_ci_lo).cell(r.ratio_ci_hi);
          if (m.record_timing) {
            w.cell(r.wall_ms);
          } else {
            w.cell(std::string_view{});
          }
          w.end();
          std::string line = row.str();
          line.resize(line.size() - 2);
          all_rows.push_back(line);
          block << id << "," << line << "\r\n";
        }
        progress << block.str();
        progress.flush();
        if (!progress) throw IoError("cannot append to '" + progress_path.string() + "'");
      }
    }
  }
  std::ostringstream out;
  out << "scenario_id,generator,integrand,mode,p,q,q_prime,r,d,n_paths,lhs_mean,lhs_stderr,rhs_mean,rhs_stderr,"
         "ratio_hat,ratio_ci_lo,ratio_ci_hi,wall_ms\r\n";
  for (const auto& r : all_rows) out << r << "\r\n";
  write_file(fs::path(m.out_dir) / "sweep.csv", out.str());
  log << "wrote " << all_rows.size() << " row(s) to " << (fs::path(m.out_dir) / "sweep.csv").string();
  if (reused > 0) log << " (" << reused << " group(s) resumed)";
  log << "\n";
  return all_finite ? exit_code::ok : exit_code::non_finite;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic convolutions driven by compensated Poisson random measures"};
  app.require_subcommand(1);
  RunManifest m;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", m.config_path, "experiment configuration (YAML)")->required();
    sub->add_option("--out", m.out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "64-bit seed; overrides the config and JUMPCONV_SEED");
    sub->add_option("--jobs", m.jobs, "worker threads")->check(CLI::Range(1u, 4096u));
    sub->add_flag("--record-timing", m.record_timing, "write measured wall_ms instead of null");
  };
  CLI::App* sample = app.add_subcommand("sample", "write sampled Poisson paths as CSV");
  CLI::App* verify = app.add_subcommand("verify", "estimate both sides of the configured inequalities");
  CLI::App* sweep = app.add_subcommand("sweep", "run a generator x integrand x q' x p grid");
  for (auto* sub : {sample, verify, sweep}) add_common(sub);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return exit_code::ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::config;
  }
  for (auto* sub : {sample, verify, sweep}) {
    if (!sub->parsed()) continue;
    m.command = sub->get_name();
    if (sub->count("--seed") > 0) m.seed = seed;
  }
  try {
    if (m.command == "sample") return cmd_sample(m, out);
    if (m.command == "verify") return cmd_verify(m, out);
    return cmd_sweep(m, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::config;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return exit_code::io;
  } catch (const HypothesisError& e) {
    err << e.what() << "\n";
    return exit_code::hypothesis;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return exit_code::non_finite;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::config;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::non_finite;
  }
}

}  // namespace jumpconv
