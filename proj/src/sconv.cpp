#include "jumpconv/sconv.hpp"

#include <cmath>
#include <utility>

namespace jumpconv {

namespace {

constexpr std::size_t certification_directions = 200;

}  // namespace

ConvolutionScenario::ConvolutionScenario(std::string id, MarkSpace ms, SmoothSpace sp, Generator gen,
                                         FieldIntegrand xi, double horizon, GridSpec grid, QuadratureConfig quad)
    : id_(std::move(id)),
      ms_(std::move(ms)),
      sp_(sp),
      gen_(std::move(gen)),
      xi_(std::move(xi)),
      horizon_(horizon),
      grid_(std::move(grid)),
      quad_(quad) {
  validate_shape();
  integrability_ = check_integrability(xi_, ms_, sp_, horizon_, quad_.step(horizon_));
  contraction_ratio_ =
      check_contraction(gen_, sp_, default_certification_times(), certification_directions);
  if (!certified_contraction(contraction_ratio_))
    throw HypothesisError("|S(t)| <= 1", gen_.kind_name() + " generator is not a contraction for the l^" +
                                             std::to_string(sp_.r()) + " norm (sampled ratio " +
                                             std::to_string(contraction_ratio_) + ")");
}

ConvolutionScenario::ConvolutionScenario(std::string id, MarkSpace ms, SmoothSpace sp, Generator gen,
                                         const StepIntegrand& xi, double horizon, GridSpec grid,
                                         QuadratureConfig quad)
    : ConvolutionScenario(std::move(id), ms, sp, std::move(gen), xi.as_field(ms.size()), horizon, std::move(grid),
                          quad) {}

void ConvolutionScenario::validate_shape() const {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw DomainError("scenario: horizon must be finite and > 0");
  if (xi_.n_marks() != ms_.size()) throw DomainError("scenario: integrand and mark space disagree");
  if (xi_.dim() != sp_.dim() || gen_.dim() != sp_.dim()) throw DomainError("scenario: dimension mismatch");
  if (grid_.times.empty()) {
    if (grid_.count < 1) throw DomainError("scenario: grid count must be >= 1");
  } else {
    if (!std::is_sorted(grid_.times.begin(), grid_.times.end()))
      throw DomainError("scenario: grid times must be sorted");
    if (grid_.times.front() < 0.0 || grid_.times.back() > horizon_)
      throw DomainError("scenario: grid times must lie in [0, T]");
  }
  if (quad_.h < 0.0) throw DomainError("scenario: quadrature step must be >= 0");
}

ConvolutionScenario ConvolutionScenario::with_integrand(FieldIntegrand xi, std::string id) const {
  ConvolutionScenario out = *this;
  out.xi_ = std::move(xi);
  if (!id.empty()) out.id_ = std::move(id);
  out.validate_shape();
  out.integrability_ = check_integrability(out.xi_, out.ms_, out.sp_, out.horizon_, out.quad_.step(out.horizon_));
  return out;
}

ConvolutionScenario ConvolutionScenario::with_grid(GridSpec grid) const {
  ConvolutionScenario out = *this;
  out.grid_ = std::move(grid);
  out.validate_shape();
  return out;
}

ConvolutionScenario ConvolutionScenario::with_space(SmoothSpace sp) const {
  return ConvolutionScenario(id_, ms_, sp, gen_, xi_, horizon_, grid_, quad_);
}

std::vector<double> ConvolutionScenario::sample_times() const {
  std::vector<double> t;
  if (grid_.times.empty()) {
    t.reserve(grid_.count + 1);
    for (std::size_t j = 0; j <= grid_.count; ++j)
      t.push_back(horizon_ * static_cast<double>(j) / static_cast<double>(grid_.count));
    t.back() = horizon_;
  } else {
    t.push_back(0.0);
    t.insert(t.end(), grid_.times.begin(), grid_.times.end());
    t.push_back(horizon_);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
  }
  return t;
}

ConvolutionEngine::ConvolutionEngine(ConvolutionScenario scn)
    : scn_(std::move(scn)),
      identity_(scn_.generator().kind() == Generator::Kind::identity),
      h_(scn_.quadrature().step(scn_.horizon())) {
  bounds_ = scn_.sample_times();
  const std::size_t n_grid = bounds_.size();
  for (double b : scn_.integrand().breaks())
    if (b > 0.0 && b < scn_.horizon()) bounds_.push_back(b);
  std::sort(bounds_.begin(), bounds_.end());
  bounds_.erase(std::unique(bounds_.begin(), bounds_.end()), bounds_.end());
  const bool uniform = scn_.grid().times.empty() && bounds_.size() == n_grid;
  const double nominal = scn_.horizon() / static_cast<double>(scn_.grid().count);

  if (const auto* poly = scn_.integrand().polynomial_coefficients(); poly && !scn_.integrand().is_zero())
    drift_poly_ = scn_.integrand().drift_coefficients(scn_.marks());

  std::vector<double> lengths;
  cells_.reserve(bounds_.size() - 1);
  for (std::size_t j = 0; j + 1 < bounds_.size(); ++j) {
    const double a = bounds_[j];
    const double delta = uniform ? nominal : bounds_[j + 1] - a;
    std::size_t idx = 0;
    while (idx < lengths.size() && lengths[idx] != delta) ++idx;
    if (idx == lengths.size()) {
      lengths.push_back(delta);
      props_.push_back(scn_.generator().propagator(delta));
      half_props_.push_back(scn_.generator().propagator(0.5 * delta));
    }
    cells_.push_back({idx, flow_with_length(a, delta).comp, flow_with_length(a, 0.5 * delta).comp});
  }
}

Point ConvolutionEngine::drift_after(double s) const {
  const auto& br = scn_.integrand().breaks();
  if (std::binary_search(br.begin(), br.end(), s))
    return scn_.integrand().drift(scn_.marks(), std::nextafter(s, std::numeric_limits<double>::infinity()));
  return scn_.integrand().drift(scn_.marks(), s);
}

ConvolutionEngine::Flow ConvolutionEngine::flow(double a, double b) const {
  if (!(b >= a)) throw DomainError("flow: need a <= b");
  return flow_with_length(a, b - a);
}

ConvolutionEngine::Flow ConvolutionEngine::flow_with_length(double a, double delta) const {
  const auto& gen = scn_.generator();
  const auto& xi = scn_.integrand();
  const auto d = static_cast<Eigen::Index>(gen.dim());
  const double b = a + delta;
  Flow f{gen.propagator(delta), Point::Zero(d)};
  if (delta == 0.0 || xi.is_zero()) return f;
  if (identity_) {
    f.comp = field_compensator(scn_.marks(), xi, a, b, h_);
    return f;
  }
  if (drift_poly_) {
    // y' = A y + m(a + tau), y(0) = 0, with the forcing generated by the
    // nilpotent shift chain w_k = tau^k / k!.
    const Matrix& mj = *drift_poly_;
    const Eigen::Index n_coef = mj.cols();
    const Eigen::Index n = d + n_coef;
    Matrix aug = Matrix::Zero(n, n);
    aug.topLeftCorner(d, d) = gen.matrix() * delta;
    double factorial = 1.0;
    for (Eigen::Index k = 0; k < n_coef; ++k) {
      if (k > 0) factorial *= static_cast<double>(k);
      Point bk = Point::Zero(d);
      double binom = 1.0;  // C(j, k)
      double power = 1.0;  // a^(j - k)
      for (Eigen::Index j = k; j < n_coef; ++j) {
        if (j > k) {
          binom = binom * static_cast<double>(j) / static_cast<double>(j - k);
          power *= a;
        }
        bk += binom * power * mj.col(j);
      }
      aug.block(0, d + k, d, 1) = factorial * delta * bk;
      if (k > 0) aug(d + k, d + k - 1) = delta;
    }
    const Matrix e = expm_pade13(aug);
    f.comp = e.block(0, d, d, 1);
    return f;
  }
  // Composite Simpson in Horner form: sum_k w_k S(k w / 2) m(b - k w / 2).
  const std::size_t panels = simpson_panels(delta, h_);
  const double w = delta / static_cast<double>(panels);
  const Matrix e = gen.propagator(0.5 * w);
  const std::size_t last = 2 * panels;
  Point acc = Point::Zero(d);
  for (std::size_t k = last + 1; k-- > 0;) {
    const double weight = (k == 0 || k == last) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    const Point m = k == last ? drift_after(a) : xi.drift(scn_.marks(), b - 0.5 * w * static_cast<double>(k));
    acc = e * acc + (weight * w / 6.0) * m;
  }
  f.comp = acc;
  if (!f.comp.allFinite()) throw NumericError("convolution compensator is not finite");
  return f;
}

Point convolve_at(const ConvolutionEngine& engine, const PoissonPath& path, double t) {
  const auto& scn = engine.scenario();
  if (!(t >= 0.0 && t <= scn.horizon())) throw DomainError("convolve_at: t must lie in [0, T]");
  if (path.n_marks() != scn.marks().size()) throw DomainError("convolve_at: path and mark space disagree");
  const auto& gen = scn.generator();
  const auto& xi = scn.integrand();
  Point acc = Point::Zero(static_cast<Eigen::Index>(gen.dim()));
  for (const auto& e : path.prefix(t)) acc += gen.apply(t - e.time, xi(e.time, e.mark));
  if (xi.is_zero() || t == 0.0) return acc;
  if (gen.kind() == Generator::Kind::identity) {
    acc -= field_compensator(scn.marks(), xi, 0.0, t, scn.quadrature().step(scn.horizon()));
    return acc;
  }
  double p0 = 0.0;
  for (double br : xi.breaks()) {
    if (br <= 0.0) continue;
    if (br >= t) break;
    acc -= gen.apply(t - br, engine.flow(p0, br).comp);
    p0 = br;
  }
  acc -= engine.flow(p0, t).comp;
  return acc;
}

Point convolve_at(const ConvolutionScenario& scn, const PoissonPath& path, double t) {
  return convolve_at(ConvolutionEngine(scn), path, t);
}

namespace {

struct PathSink {
  static constexpr bool wants_midpoint = false;
  CadlagPath out;

  void grid_point(double t, const Point& u) {
    if (out.size() > 0 && out.times().back() == t) return;
    out.push(t, u);
  }
  void advance(double, double, const Point&, const Point*, const Point&) {}
  void jump(const Event& e, const Point& left, const Point& right, const Point&) {
    out.push_jump({e.time, e.mark, left, right});
  }
};

struct ResidualSink {
  static constexpr bool wants_midpoint = false;
  const ConvolutionScenario& scn;
  double h;
  Point q;
  Point jumps;
  Point comp;
  double best = 0.0;

  ResidualSink(const ConvolutionScenario& s, double step)
      : scn(s),
        h(step),
        q(Point::Zero(static_cast<Eigen::Index>(s.space().dim()))),
        jumps(q),
        comp(q) {}

  void grid_point(double, const Point& u) { best = std::max(best, norm(scn.space(), u - q - (jumps - comp))); }
  void advance(double a, double b, const Point& ua, const Point*, const Point& ub) {
    const auto& am = scn.generator().matrix();
    q += 0.5 * (b - a) * (am * ua + am * ub);
    comp += field_compensator(scn.marks(), scn.integrand(), a, b, h);
  }
  void jump(const Event&, const Point&, const Point&, const Point& xi) { jumps += xi; }
};

struct ItoSink {
  static constexpr bool wants_midpoint = true;
  const ConvolutionEngine& engine;
  ItoTerms terms;
  Point last;

  explicit ItoSink(const ConvolutionEngine& e) : engine(e) {}

  void grid_point(double, const Point& u) {
    terms.sup_phi = std::max(terms.sup_phi, phi(engine.scenario().space(), u));
    last = u;
  }
  void advance(double a, double b, const Point& ua, const Point* um, const Point& ub) {
    const auto& scn = engine.scenario();
    const auto& sp = scn.space();
    const auto& am = scn.generator().matrix();
    const double len = b - a;
    const double mid = 0.5 * (a + b);
    auto flow_term = [&](const Point& u) { return phi_grad(sp, u, am * u); };
    const double ga = flow_term(ua), gm = flow_term(*um), gb = flow_term(ub);
    const double s1 = len / 6.0 * (ga + 4.0 * gm + gb);
    const double t1 = 0.5 * len * (ga + gb);
    const double ca = phi_grad(sp, ua, engine.drift_after(a));
    const double cm = phi_grad(sp, *um, scn.integrand().drift(scn.marks(), mid));
    const double cb = phi_grad(sp, ub, scn.integrand().drift(scn.marks(), b));
    const double s2 = len / 6.0 * (ca + 4.0 * cm + cb);
    const double t2 = 0.5 * len * (ca + cb);
    terms.drift_term += s1;
    terms.mart_term -= s2;
    terms.tolerance += std::abs(s1 - t1) + std::abs(s2 - t2);
  }
  void jump(const Event&, const Point& left, const Point& right, const Point& xi) {
    const auto& sp = engine.scenario().space();
    const double slope = phi_grad(sp, left, xi);
    const double pl = phi(sp, left), pr = phi(sp, right);
    terms.mart_term += slope;
    terms.jump_term += pr - pl - slope;
    terms.sup_phi = std::max({terms.sup_phi, pl, pr});
  }
};

}  // namespace

CadlagPath convolution_path(const ConvolutionEngine& engine, const PoissonPath& path) {
  PathSink sink{CadlagPath(engine.scenario().horizon(), engine.scenario().space().dim())};
  engine.run(path, sink);
  return std::move(sink.out);
}

CadlagPath convolution_path(const ConvolutionScenario& scn, const PoissonPath& path) {
  return convolution_path(ConvolutionEngine(scn), path);
}

double strong_solution_residual(const ConvolutionEngine& engine, const PoissonPath& path) {
  ResidualSink sink(engine.scenario(), engine.scenario().quadrature().step(engine.scenario().horizon()));
  engine.run(path, sink);
  return sink.best;
}

double strong_solution_residual(const ConvolutionScenario& scn, const PoissonPath& path) {
  return strong_solution_residual(ConvolutionEngine(scn), path);
}

ConvolutionScenario yosida_scenario(const ConvolutionScenario& scn, double n) {
  if (!(n > 0.0)) throw DomainError("yosida: n must be > 0");
  const Matrix scale = n * scn.generator().resolvent_matrix(n);
  return scn.with_integrand(scn.integrand().mapped(scale), scn.id() + "/yosida");
}

CadlagPath yosida_convolution(const ConvolutionScenario& scn, const PoissonPath& path, double n) {
  return convolution_path(yosida_scenario(scn, n), path);
}

ItoTerms ito_terms(const ConvolutionEngine& engine, const PoissonPath& path, double t) {
  ItoSink sink(engine);
  engine.run(path, sink, t);
  const auto& sp = engine.scenario().space();
  sink.terms.phi_u_t = phi(sp, sink.last);
  sink.terms.tolerance += 1e-12 * (1.0 + sink.terms.sup_phi);
  return sink.terms;
}

ItoTerms ito_terms(const ConvolutionScenario& scn, const PoissonPath& path, double t) {
  return ito_terms(ConvolutionEngine(scn), path, t);
}

}  // namespace jumpconv
