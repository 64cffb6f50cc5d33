#include "jumpconv/sint.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "jumpconv/csv.hpp"
#include "jumpconv/errors.hpp"

namespace jumpconv {

CadlagPath::CadlagPath(double horizon, std::size_t dim) : horizon_(horizon), dim_(dim) {
  if (!(horizon > 0.0) || dim < 1) throw DomainError("CadlagPath: horizon > 0 and dim >= 1 required");
}

void CadlagPath::push(double t, Point value) {
  if (!times_.empty() && t < times_.back()) throw DomainError("CadlagPath: times must not decrease");
  if (static_cast<std::size_t>(value.size()) != dim_) throw DomainError("CadlagPath: dimension mismatch");
  times_.push_back(t);
  values_.push_back(std::move(value));
  jump_of_point_.push_back(-1);
}

void CadlagPath::push_jump(JumpRecord jump) {
  if (!jumps_.empty() && !(jump.time > jumps_.back().time))
    throw DomainError("CadlagPath: jump times must increase");
  push(jump.time, jump.right);
  jump_of_point_.back() = static_cast<std::int64_t>(jumps_.size());
  jumps_.push_back(std::move(jump));
}

double CadlagPath::sup_norm(const SmoothSpace& sp) const {
  double best = 0.0;
  for (const auto& v : values_) best = std::max(best, norm(sp, v));
  for (const auto& j : jumps_) best = std::max(best, norm(sp, j.left));
  return best;
}

void CadlagPath::write_csv(std::ostream& os) const {
  csv::RowWriter w(os);
  w.cell("t");
  for (std::size_t i = 0; i < dim_; ++i) w.cell("x" + std::to_string(i + 1));
  w.cell("is_jump");
  w.end();
  auto row = [&](double t, const Point& x, int flag) {
    w.cell(t);
    for (Eigen::Index i = 0; i < x.size(); ++i) w.cell(x[i]);
    w.cell(flag);
    w.end();
  };
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (jump_of_point_[i] >= 0) {
      row(times_[i], jumps_[static_cast<std::size_t>(jump_of_point_[i])].left, 0);
      row(times_[i], values_[i], 1);
    } else {
      row(times_[i], values_[i], 0);
    }
  }
}

double sup_distance(const SmoothSpace& sp, const CadlagPath& a, const CadlagPath& b) {
  if (a.times() != b.times() || a.jumps().size() != b.jumps().size())
    throw DomainError("sup_distance: paths are not sampled at the same times");
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, norm(sp, a.values()[i] - b.values()[i]));
  for (std::size_t i = 0; i < a.jumps().size(); ++i)
    best = std::max(best, norm(sp, a.jumps()[i].left - b.jumps()[i].left));
  return best;
}

namespace {

void check_time(double t, double horizon, const char* who) {
  if (!(t >= 0.0 && t <= horizon)) throw DomainError(std::string(who) + ": t must lie in [0, T]");
}

}  // namespace

Point integrate_step(const PoissonPath& path, const MarkSpace& ms, const StepIntegrand& f, double t) {
  check_time(t, path.horizon(), "integrate_step");
  if (path.n_marks() != ms.size()) throw DomainError("integrate_step: mark space mismatch");
  const StepIntegrand g = f.resolve(path);
  const auto& bp = g.breakpoints();
  Point acc = Point::Zero(static_cast<Eigen::Index>(g.dim()));
  for (std::size_t j = 0; j < g.intervals(); ++j) {
    const double a = std::min(bp[j], t);
    const double b = std::min(bp[j + 1], t);
    if (!(b > a)) continue;
    for (const auto& c : g.cells()[j]) acc += compensated(path, ms, a, b, c.cell) * c.coefficient;
  }
  return acc;
}

Point field_compensator(const MarkSpace& ms, const FieldIntegrand& f, double a, double b, double h) {
  if (f.has_antiderivative()) {
    Point acc = Point::Zero(static_cast<Eigen::Index>(f.dim()));
    for (std::size_t k = 0; k < ms.size(); ++k)
      acc += ms.weight(k) * (f.antiderivative(b, k) - f.antiderivative(a, k));
    return acc;
  }
  const Point zero = Point::Zero(static_cast<Eigen::Index>(f.dim()));
  Point acc = piecewise_simpson([&](double s) { return f.drift(ms, s); }, a, b, h, f.breaks(), zero);
  if (!acc.allFinite()) throw NumericError("compensator quadrature is not finite");
  return acc;
}

Point integrate_field(const PoissonPath& path, const MarkSpace& ms, const FieldIntegrand& f, double t,
                      const QuadratureConfig& quad) {
  check_time(t, path.horizon(), "integrate_field");
  if (path.n_marks() != ms.size() || f.n_marks() != ms.size())
    throw DomainError("integrate_field: mark space mismatch");
  Point acc = Point::Zero(static_cast<Eigen::Index>(f.dim()));
  for (const auto& e : path.prefix(t)) acc += f(e.time, e.mark);
  acc -= field_compensator(ms, f, 0.0, t, quad.step(path.horizon()));
  if (!acc.allFinite()) throw NumericError("integrate_field: non-finite value");
  return acc;
}

Point integrate_restricted(const PoissonPath& path, const MarkSpace& ms, const FieldIntegrand& f, double a,
                           double b, const MarkSet& marks, const QuadratureConfig& quad) {
  if (!(0.0 <= a && a <= b && b <= path.horizon())) throw DomainError("integrate_restricted: need 0 <= a <= b <= T");
  Point acc = Point::Zero(static_cast<Eigen::Index>(f.dim()));
  for (const auto& e : path.window(a, b))
    if (marks.contains(e.mark)) acc += f(e.time, e.mark);
  std::vector<double> w(ms.size(), 0.0);
  for (std::size_t k = 0; k < ms.size(); ++k)
    if (marks.contains(k)) w[k] = ms.weight(k);
  const double h = quad.step(path.horizon());
  for (std::size_t k = 0; k < ms.size(); ++k) {
    if (w[k] == 0.0) continue;
    if (f.has_antiderivative()) {
      acc -= w[k] * (f.antiderivative(b, k) - f.antiderivative(a, k));
    } else {
      const Point zero = Point::Zero(static_cast<Eigen::Index>(f.dim()));
      acc -= w[k] * piecewise_simpson([&](double s) { return f(s, k); }, a, b, h, f.breaks(), zero);
    }
  }
  return acc;
}

CadlagPath integral_path(const PoissonPath& path, const MarkSpace& ms, const FieldIntegrand& f,
                         const std::vector<double>& grid, const QuadratureConfig& quad) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("integral_path: grid must be sorted");
  if (!grid.empty() && (grid.front() < 0.0 || grid.back() > path.horizon()))
    throw DomainError("integral_path: grid must lie in [0, T]");
  const double h = quad.step(path.horizon());
  CadlagPath out(path.horizon(), f.dim());
  Point jumps = Point::Zero(static_cast<Eigen::Index>(f.dim()));
  Point comp = Point::Zero(static_cast<Eigen::Index>(f.dim()));
  double now = 0.0;
  auto advance = [&](double t) {
    if (t > now) comp += field_compensator(ms, f, now, t, h);
    now = t;
  };
  const auto events = path.events();
  std::size_t e = 0;
  for (double g : grid) {
    while (e < events.size() && events[e].time <= g) {
      advance(events[e].time);
      const Point left = jumps - comp;
      jumps += f(events[e].time, events[e].mark);
      out.push_jump({events[e].time, events[e].mark, left, jumps - comp});
      ++e;
    }
    advance(g);
    if (out.size() > 0 && out.times().back() == g) continue;
    out.push(g, jumps - comp);
  }
  while (e < events.size()) {
    advance(events[e].time);
    const Point left = jumps - comp;
    jumps += f(events[e].time, events[e].mark);
    out.push_jump({events[e].time, events[e].mark, left, jumps - comp});
    ++e;
  }
  return out;
}

double ls_integral_N(const PoissonPath& path, const ScalarRule& g, double t) {
  check_time(t, path.horizon(), "ls_integral_N");
  double acc = 0.0;
  for (const auto& e : path.prefix(t)) {
    const double v = g.eval(e.time, e.mark);
    if (v < 0.0) throw DomainError("ls_integral_N: integrand must be nonnegative");
    acc += v;
  }
  return acc;
}

double ls_integral_nu(const MarkSpace& ms, const ScalarRule& g, double t, const QuadratureConfig& quad) {
  if (!(t >= 0.0)) throw DomainError("ls_integral_nu: t must be >= 0");
  if (t == 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < ms.size(); ++k) {
    double part;
    if (g.antiderivative) {
      part = g.antiderivative(t, k) - g.antiderivative(0.0, k);
    } else {
      part = piecewise_simpson([&](double s) {
        const double v = g.eval(s, k);
        if (v < 0.0) throw DomainError("ls_integral_nu: integrand must be nonnegative");
        return v;
      }, 0.0, t, quad.step(t), g.breaks, 0.0);
    }
    acc += ms.weight(k) * part;
  }
  if (!std::isfinite(acc)) throw NumericError("ls_integral_nu: non-finite value");
  return acc;
}

}  // namespace jumpconv
