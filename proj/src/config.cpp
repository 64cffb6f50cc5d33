#include "jumpconv/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "jumpconv/errors.hpp"

namespace jumpconv {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    const auto m = at.Mark();
    std::ostringstream os;
    os << source_;
    if (!m.is_null()) os << ":" << m.line + 1 << ":" << m.column + 1;
    os << ": " << msg;
    throw ConfigError(os.str());
  }

  void expect_map(const YAML::Node& n, const std::string& path) const {
    if (!n.IsMap()) fail(n, "'" + path + "' must be a mapping");
  }

  void check_keys(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> allowed) const {
    expect_map(n, path);
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) fail(kv.first, "unknown key '" + join(path, key) + "'");
    }
  }

  YAML::Node require(const YAML::Node& n, const std::string& path, const std::string& key) const {
    const YAML::Node v = n[key];
    if (!v) fail(n, "missing key '" + join(path, key) + "'");
    return v;
  }

  double real(const YAML::Node& n, const std::string& path) const {
    if (!n.IsScalar()) fail(n, "'" + path + "' must be a number");
    double v;
    try {
      v = n.as<double>();
    } catch (const YAML::Exception&) {
      fail(n, "'" + path + "' must be a number, got '" + n.Scalar() + "'");
    }
    if (!std::isfinite(v)) fail(n, "'" + path + "' must be finite");
    return v;
  }

  std::uint64_t count(const YAML::Node& n, const std::string& path) const {
    if (!n.IsScalar()) fail(n, "'" + path + "' must be a nonnegative integer");
    const std::string& s = n.Scalar();
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      fail(n, "'" + path + "' must be a nonnegative 64-bit integer, got '" + s + "'");
    return v;
  }

  bool boolean(const YAML::Node& n, const std::string& path) const {
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      fail(n, "'" + path + "' must be true or false");
    }
  }

  std::string text(const YAML::Node& n, const std::string& path) const {
    if (!n.IsScalar()) fail(n, "'" + path + "' must be a string");
    return n.Scalar();
  }

  std::vector<double> reals(const YAML::Node& n, const std::string& path) const {
    if (n.IsScalar()) return {real(n, path)};
    if (!n.IsSequence()) fail(n, "'" + path + "' must be a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(real(n[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  Point vector(const YAML::Node& n, const std::string& path, std::size_t dim) const {
    const auto v = reals(n, path);
    if (v.size() != dim) fail(n, "'" + path + "' must have " + std::to_string(dim) + " entries");
    return Eigen::Map<const Point>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  std::vector<Point> per_mark(const YAML::Node& n, const std::string& path, std::size_t marks,
                              std::size_t dim) const {
    if (!n.IsSequence() || n.size() != marks)
      fail(n, "'" + path + "' must list one vector per mark (" + std::to_string(marks) + ")");
    std::vector<Point> out;
    for (std::size_t k = 0; k < marks; ++k) out.push_back(vector(n[k], path + "[" + std::to_string(k) + "]", dim));
    return out;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  template <class F>
  auto guarded(const YAML::Node& at, F&& build) const {
    try {
      return build();
    } catch (const DomainError& e) {
      fail(at, e.what());
    }
  }

  Generator generator(const YAML::Node& n, const std::string& path, std::size_t dim) const {
    const std::string kind = text(require(n, path, "kind"), join(path, "kind"));
    if (kind == "identity") {
      check_keys(n, path, {"kind"});
      return Generator::identity(dim);
    }
    if (kind == "diagonal") {
      check_keys(n, path, {"kind", "rates"});
      const auto node = require(n, path, "rates");
      const auto rates = reals(node, join(path, "rates"));
      if (rates.size() != dim) fail(node, "'" + join(path, "rates") + "' must have " + std::to_string(dim) + " entries");
      return guarded(node, [&] { return Generator::diagonal(rates); });
    }
    if (kind == "dirichlet_laplacian") {
      check_keys(n, path, {"kind", "scale"});
      const auto node = require(n, path, "scale");
      return guarded(node, [&] { return Generator::dirichlet_laplacian(dim, real(node, join(path, "scale"))); });
    }
    if (kind == "dense") {
      check_keys(n, path, {"kind", "matrix"});
      const auto node = require(n, path, "matrix");
      if (!node.IsSequence() || node.size() != dim)
        fail(node, "'" + join(path, "matrix") + "' must have " + std::to_string(dim) + " rows");
      Matrix a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
      for (std::size_t i = 0; i < dim; ++i)
        a.row(static_cast<Eigen::Index>(i)) = vector(node[i], join(path, "matrix") + "[" + std::to_string(i) + "]", dim);
      return guarded(node, [&] { return Generator::dense(a); });
    }
    fail(n["kind"], "unknown generator kind '" + kind + "' (identity, diagonal, dirichlet_laplacian, dense)");
  }

  FieldIntegrand integrand(const YAML::Node& n, const std::string& path, std::size_t dim, std::size_t marks) const {
    const std::string kind = text(require(n, path, "kind"), join(path, "kind"));
    double scale = 1.0;
    if (n["scale"]) scale = real(n["scale"], join(path, "scale"));
    auto done = [&](FieldIntegrand f) { return scale == 1.0 ? f : f.scaled(scale); };
    if (kind == "zero") {
      check_keys(n, path, {"kind", "scale"});
      return FieldIntegrand::zero(dim, marks);
    }
    if (kind == "constant") {
      check_keys(n, path, {"kind", "scale", "values"});
      const auto node = require(n, path, "values");
      return done(guarded(node, [&] { return FieldIntegrand::constant(per_mark(node, join(path, "values"), marks, dim)); }));
    }
    if (kind == "polynomial") {
      check_keys(n, path, {"kind", "scale", "coefficients"});
      const auto node = require(n, path, "coefficients");
      const std::string cpath = join(path, "coefficients");
      if (!node.IsSequence() || node.size() != marks)
        fail(node, "'" + cpath + "' must list one coefficient list per mark");
      std::vector<Matrix> coeffs;
      for (std::size_t k = 0; k < marks; ++k) {
        const auto powers = node[k];
        const std::string kpath = cpath + "[" + std::to_string(k) + "]";
        if (!powers.IsSequence() || powers.size() == 0) fail(powers, "'" + kpath + "' must list t^0, t^1, ... vectors");
        Matrix c(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(powers.size()));
        for (std::size_t j = 0; j < powers.size(); ++j)
          c.col(static_cast<Eigen::Index>(j)) = vector(powers[j], kpath + "[" + std::to_string(j) + "]", dim);
        coeffs.push_back(std::move(c));
      }
      return done(guarded(node, [&] { return FieldIntegrand::polynomial(std::move(coeffs)); }));
    }
    if (kind == "sinusoid") {
      check_keys(n, path, {"kind", "scale", "amplitude", "frequency", "phase"});
      const auto node = require(n, path, "amplitude");
      const auto amp = per_mark(node, join(path, "amplitude"), marks, dim);
      const double freq = real(require(n, path, "frequency"), join(path, "frequency"));
      const double phase = n["phase"] ? real(n["phase"], join(path, "phase")) : 0.0;
      return done(FieldIntegrand::from_rule(dim, marks, [amp, freq, phase](double t, std::size_t k) -> Point {
        return amp[k] * std::sin(freq * t + phase);
      }));
    }
    if (kind == "step") {
      check_keys(n, path, {"kind", "scale", "breakpoints", "values"});
      const auto bnode = require(n, path, "breakpoints");
      const auto bp = reals(bnode, join(path, "breakpoints"));
      const auto vnode = require(n, path, "values");
      const std::string vpath = join(path, "values");
      if (bp.size() < 2) fail(bnode, "'" + join(path, "breakpoints") + "' needs at least two entries");
      if (!vnode.IsSequence() || vnode.size() != bp.size() - 1)
        fail(vnode, "'" + vpath + "' must list one entry per interval (" + std::to_string(bp.size() - 1) + ")");
      std::vector<std::vector<StepCell>> cells;
      for (std::size_t j = 0; j + 1 < bp.size(); ++j) {
        const auto vals = per_mark(vnode[j], vpath + "[" + std::to_string(j) + "]", marks, dim);
        std::vector<StepCell> row;
        for (std::size_t k = 0; k < marks; ++k) row.push_back({MarkSet::only(marks, k), vals[k]});
        cells.push_back(std::move(row));
      }
      return done(guarded(bnode, [&] { return StepIntegrand(bp, std::move(cells)).as_field(marks); }));
    }
    fail(n["kind"], "unknown integrand kind '" + kind + "' (zero, constant, polynomial, sinusoid, step)");
  }

 private:
  std::string source_;
};

std::size_t positive_count(const Reader& rd, const YAML::Node& n, const std::string& path) {
  const auto v = rd.count(n, path);
  if (v < 1) rd.fail(n, "'" + path + "' must be >= 1");
  return static_cast<std::size_t>(v);
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  Reader rd(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                      ": " + e.msg);
  }
  if (!root || !root.IsMap()) throw ConfigError(source + ": top level must be a mapping");
  rd.check_keys(root, "", {"schema", "id", "seed", "horizon", "marks", "space", "generator", "integrand", "grid",
                           "quadrature", "sample", "verify", "sweep"});
  const auto schema = rd.text(rd.require(root, "", "schema"), "schema");
  if (schema != config_schema) rd.fail(root["schema"], "unsupported schema '" + schema + "' (expected jumpconv/1)");

  RunConfig cfg;
  cfg.source = source;
  if (root["id"]) cfg.id = rd.text(root["id"], "id");
  for (char c : cfg.id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
      rd.fail(root["id"], "'id' may contain only letters, digits, '_', '-' and '.'");
  if (root["seed"]) cfg.seed = rd.count(root["seed"], "seed");
  if (root["horizon"]) {
    cfg.horizon = rd.real(root["horizon"], "horizon");
    if (!(cfg.horizon > 0.0)) rd.fail(root["horizon"], "'horizon' must be > 0");
  }

  const auto marks = rd.require(root, "", "marks");
  rd.check_keys(marks, "marks", {"weights", "names"});
  {
    const auto wnode = rd.require(marks, "marks", "weights");
    const auto weights = rd.reals(wnode, "marks.weights");
    if (marks["names"]) {
      const auto nn = marks["names"];
      if (!nn.IsSequence() || nn.size() != weights.size())
        rd.fail(nn, "'marks.names' must list one name per weight");
      std::vector<std::string> names;
      for (std::size_t i = 0; i < nn.size(); ++i) names.push_back(rd.text(nn[i], "marks.names"));
      cfg.marks = rd.guarded(wnode, [&] { return MarkSpace(names, weights); });
    } else {
      cfg.marks = rd.guarded(wnode, [&] { return MarkSpace(weights); });
    }
  }
  const std::size_t m = cfg.marks->size();

  if (const auto sp = root["space"]) {
    rd.check_keys(sp, "space", {"dim", "r", "q", "p"});
    const auto dim = positive_count(rd, rd.require(sp, "space", "dim"), "space.dim");
    const double r = rd.real(rd.require(sp, "space", "r"), "space.r");
    const double q = rd.real(rd.require(sp, "space", "q"), "space.q");
    const double p = rd.real(rd.require(sp, "space", "p"), "space.p");
    cfg.space = rd.guarded(sp, [&] { return SmoothSpace(dim, r, q, p); });
  }
  auto need_space = [&](const YAML::Node& at, const char* what) {
    if (!cfg.space) rd.fail(at, std::string("'") + what + "' requires a 'space' section");
    return cfg.space->dim();
  };
  if (const auto g = root["generator"]) cfg.generator = rd.generator(g, "generator", need_space(g, "generator"));
  if (const auto f = root["integrand"]) cfg.integrand = rd.integrand(f, "integrand", need_space(f, "integrand"), m);
  if (const auto g = root["grid"]) {
    rd.check_keys(g, "grid", {"count", "times"});
    if (g["count"] && g["times"]) rd.fail(g, "'grid' takes either 'count' or 'times'");
    if (g["count"]) cfg.grid.count = positive_count(rd, g["count"], "grid.count");
    if (g["times"]) {
      cfg.grid.times = rd.reals(g["times"], "grid.times");
      if (cfg.grid.times.empty()) rd.fail(g["times"], "'grid.times' must not be empty");
    }
  }
  if (const auto qd = root["quadrature"]) {
    rd.check_keys(qd, "quadrature", {"h"});
    cfg.quadrature.h = rd.real(rd.require(qd, "quadrature", "h"), "quadrature.h");
    if (cfg.quadrature.h < 0.0) rd.fail(qd["h"], "'quadrature.h' must be >= 0");
  }

  if (const auto s = root["sample"]) {
    rd.check_keys(s, "sample", {"n_paths", "convolution"});
    SampleSection sec;
    if (s["n_paths"]) sec.n_paths = positive_count(rd, s["n_paths"], "sample.n_paths");
    if (s["convolution"]) sec.convolution = rd.boolean(s["convolution"], "sample.convolution");
    cfg.sample = sec;
  }

  if (const auto v = root["verify"]) {
    rd.check_keys(v, "verify", {"modes", "q_prime", "n_paths", "t_eval", "lambda", "moment_level",
                                "layer_cake_levels", "step_refinements"});
    VerifySection sec;
    const auto mn = rd.require(v, "verify", "modes");
    if (mn.IsScalar()) {
      sec.modes.push_back(mn.Scalar());
    } else if (mn.IsSequence()) {
      for (std::size_t i = 0; i < mn.size(); ++i) sec.modes.push_back(rd.text(mn[i], "verify.modes"));
    } else {
      rd.fail(mn, "'verify.modes' must be a mode name or a list of them");
    }
    static const std::set<std::string> known{"thm4_6",        "thm4_9",       "cor4_10",    "stopped",
                                             "higher_moment", "ito_isometry", "layer_cake", "step_approx"};
    for (const auto& mode : sec.modes)
      if (!known.count(mode)) rd.fail(mn, "unknown mode '" + mode + "'");
    if (sec.modes.empty()) rd.fail(mn, "'verify.modes' must not be empty");
    if (v["q_prime"]) sec.q_prime = rd.reals(v["q_prime"], "verify.q_prime");
    for (const auto& mode : sec.modes)
      if ((mode == "thm4_6" || mode == "thm4_9" || mode == "cor4_10" || mode == "layer_cake") && sec.q_prime.empty())
        rd.fail(v, "mode '" + mode + "' needs 'verify.q_prime'");
    if (v["n_paths"]) sec.n_paths = positive_count(rd, v["n_paths"], "verify.n_paths");
    if (v["t_eval"]) sec.t_eval = rd.real(v["t_eval"], "verify.t_eval");
    if (v["lambda"]) sec.lambda = rd.real(v["lambda"], "verify.lambda");
    if (v["moment_level"]) sec.moment_level = static_cast<int>(rd.count(v["moment_level"], "verify.moment_level"));
    if (v["layer_cake_levels"]) sec.layer_cake_levels = positive_count(rd, v["layer_cake_levels"], "verify.layer_cake_levels");
    if (v["step_refinements"]) sec.step_refinements = static_cast<int>(positive_count(rd, v["step_refinements"], "verify.step_refinements"));
    for (const auto& mode : sec.modes) {
      if (mode == "stopped" && !sec.lambda) rd.fail(v, "mode 'stopped' needs 'verify.lambda'");
      if (mode == "higher_moment" && !sec.moment_level) rd.fail(v, "mode 'higher_moment' needs 'verify.moment_level'");
    }
    cfg.verify = sec;
  }

  if (const auto s = root["sweep"]) {
    rd.check_keys(s, "sweep", {"generators", "integrands", "q_prime", "p", "mode", "n_paths", "t_eval"});
    SweepSection sec;
    const auto gn = rd.require(s, "sweep", "generators");
    const auto fn = rd.require(s, "sweep", "integrands");
    const std::size_t dim = need_space(s, "sweep");
    auto named = [&](const YAML::Node& list, const std::string& path, auto&& parse) {
      if (!list.IsMap()) rd.fail(list, "'" + path + "' must map names to specifications");
      for (const auto& kv : list) {
        const auto name = kv.first.as<std::string>();
        for (char c : name)
          if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
            rd.fail(kv.first, "names in '" + path + "' may contain only letters, digits, '_', '-' and '.'");
        parse(name, kv.second, path + "." + name);
      }
    };
    named(gn, "sweep.generators", [&](const std::string& name, const YAML::Node& spec, const std::string& path) {
      sec.generators.emplace_back(name, rd.generator(spec, path, dim));
    });
    named(fn, "sweep.integrands", [&](const std::string& name, const YAML::Node& spec, const std::string& path) {
      sec.integrands.emplace_back(name, rd.integrand(spec, path, dim, m));
    });
    sec.q_prime = rd.reals(rd.require(s, "sweep", "q_prime"), "sweep.q_prime");
    sec.p = s["p"] ? rd.reals(s["p"], "sweep.p") : std::vector<double>{cfg.space->p()};
    if (s["mode"]) {
      sec.mode = rd.text(s["mode"], "sweep.mode");
      if (sec.mode != "thm4_6" && sec.mode != "thm4_9" && sec.mode != "cor4_10")
        rd.fail(s["mode"], "'sweep.mode' must be thm4_6, thm4_9 or cor4_10");
    }
    if (s["n_paths"]) sec.n_paths = positive_count(rd, s["n_paths"], "sweep.n_paths");
    if (s["t_eval"]) sec.t_eval = rd.real(s["t_eval"], "sweep.t_eval");
    for (double p : sec.p)
      rd.guarded(s, [&] { return cfg.space->with_p(p); });
    cfg.sweep = std::move(sec);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

ConvolutionScenario RunConfig::scenario() const {
  if (!space) throw ConfigError(source + ": missing section 'space'");
  if (!generator) throw ConfigError(source + ": missing section 'generator'");
  if (!integrand) throw ConfigError(source + ": missing section 'integrand'");
  try {
    return ConvolutionScenario(id, *marks, *space, *generator, *integrand, horizon, grid, quadrature);
  } catch (const HypothesisError&) {
    throw;
  } catch (const DomainError& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

}  // namespace jumpconv
