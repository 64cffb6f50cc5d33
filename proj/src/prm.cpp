#include "jumpconv/prm.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "jumpconv/csv.hpp"
#include "jumpconv/errors.hpp"

namespace jumpconv {

MarkSpace::MarkSpace(std::vector<std::string> names, std::vector<double> weights)
    : names_(std::move(names)), weights_(std::move(weights)) {
  if (weights_.empty()) throw DomainError("MarkSpace: at least one mark is required");
  if (names_.size() != weights_.size()) throw DomainError("MarkSpace: names and weights differ in length");
  cumulative_.reserve(weights_.size());
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("MarkSpace: every weight must be finite and > 0");
    total_rate_ += w;
    cumulative_.push_back(total_rate_);
  }
}

MarkSpace::MarkSpace(std::vector<double> weights)
    : MarkSpace(
          [&] {
            std::vector<std::string> names;
            for (std::size_t k = 0; k < weights.size(); ++k) names.push_back("z" + std::to_string(k + 1));
            return names;
          }(),
          weights) {}

MarkSet MarkSet::all(std::size_t n_marks) {
  MarkSet s;
  s.member_.assign(n_marks, true);
  return s;
}

MarkSet MarkSet::none(std::size_t n_marks) {
  MarkSet s;
  s.member_.assign(n_marks, false);
  return s;
}

MarkSet MarkSet::only(std::size_t n_marks, std::size_t k) { return of(n_marks, {k}); }

MarkSet MarkSet::of(std::size_t n_marks, std::initializer_list<std::size_t> ks) {
  return of(n_marks, std::span<const std::size_t>(ks.begin(), ks.size()));
}

MarkSet MarkSet::of(std::size_t n_marks, std::span<const std::size_t> ks) {
  MarkSet s = none(n_marks);
  for (auto k : ks) {
    if (k >= n_marks) throw DomainError("MarkSet: mark index out of range");
    s.member_[k] = true;
  }
  return s;
}

bool MarkSet::empty() const noexcept {
  return std::none_of(member_.begin(), member_.end(), [](bool b) { return b; });
}

bool MarkSet::disjoint(const MarkSet& other) const noexcept {
  const auto n = std::min(member_.size(), other.member_.size());
  for (std::size_t k = 0; k < n; ++k)
    if (member_[k] && other.member_[k]) return false;
  return true;
}

MarkSet MarkSet::united(const MarkSet& other) const {
  if (other.universe() != universe()) throw DomainError("MarkSet: universes differ");
  MarkSet s = *this;
  for (std::size_t k = 0; k < member_.size(); ++k) s.member_[k] = member_[k] || other.member_[k];
  return s;
}

double MarkSet::measure(const MarkSpace& ms) const {
  if (universe() != ms.size()) throw DomainError("MarkSet: universe does not match the mark space");
  double nu = 0.0;
  for (std::size_t k = 0; k < member_.size(); ++k)
    if (member_[k]) nu += ms.weight(k);
  return nu;
}

PoissonPath::PoissonPath(double horizon, std::size_t n_marks, std::vector<Event> events, std::uint64_t seed,
                         std::size_t collisions)
    : horizon_(horizon), n_marks_(n_marks), events_(std::move(events)), seed_(seed), collisions_(collisions) {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw DomainError("PoissonPath: horizon must be > 0");
  double prev = 0.0;
  for (const auto& e : events_) {
    if (!(e.time > prev)) throw DomainError("PoissonPath: event times must be strictly increasing in (0, T]");
    if (e.time > horizon_) throw DomainError("PoissonPath: event beyond horizon");
    if (e.mark >= n_marks_) throw DomainError("PoissonPath: invalid mark index");
    prev = e.time;
  }
}

std::span<const Event> PoissonPath::prefix(double t) const noexcept {
  auto end = std::upper_bound(events_.begin(), events_.end(), t,
                              [](double v, const Event& e) { return v < e.time; });
  return {events_.data(), static_cast<std::size_t>(end - events_.begin())};
}

std::span<const Event> PoissonPath::window(double a, double b) const noexcept {
  auto by_time = [](double v, const Event& e) { return v < e.time; };
  auto lo = std::upper_bound(events_.begin(), events_.end(), a, by_time);
  auto hi = std::upper_bound(lo, events_.end(), b, by_time);
  return {events_.data() + (lo - events_.begin()), static_cast<std::size_t>(hi - lo)};
}

std::uint64_t sample_count(double eta, Rng& rng) { return rng.poisson(eta); }

PoissonPath sample_path(const MarkSpace& ms, double horizon, Rng& rng) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("sample_path: horizon must be > 0");
  const double rate = ms.total_rate();
  std::vector<Event> events;
  std::size_t collisions = 0;
  double t = 0.0;
  for (;;) {
    double next = t + rng.exponential(rate);
    if (next > horizon) break;
    if (!(next > t)) {
      // Floating-point collision (or a zero gap at the origin): nudge by one ulp.
      next = std::nextafter(t, horizon + 1.0);
      ++collisions;
      if (next > horizon) break;
    }
    t = next;
    events.push_back({t, rng.categorical(ms.cumulative())});
  }
  return PoissonPath(horizon, ms.size(), std::move(events), rng.seed(), collisions);
}

PoissonPath sample_path(const MarkSpace& ms, double horizon, std::uint64_t seed) {
  Rng rng(seed);
  return sample_path(ms, horizon, rng);
}

namespace {
void check_window(const PoissonPath& path, double a, double b) {
  if (!(a >= 0.0) || !(a <= b) || !(b <= path.horizon()))
    throw DomainError("count: require 0 <= a <= b <= horizon");
}
}  // namespace

std::size_t count(const PoissonPath& path, double a, double b, const MarkSet& marks) {
  check_window(path, a, b);
  if (marks.universe() != path.n_marks()) throw DomainError("count: mark set universe mismatch");
  std::size_t n = 0;
  for (const auto& e : path.window(a, b))
    if (marks.contains(e.mark)) ++n;
  return n;
}

double compensated(const PoissonPath& path, const MarkSpace& ms, double a, double b, const MarkSet& marks) {
  const auto n = count(path, a, b, marks);
  return static_cast<double>(n) - (b - a) * marks.measure(ms);
}

void write_path_csv(std::ostream& os, const PoissonPath& path) {
  csv::RowWriter row(os);
  row.cell("t").cell("mark_index").end();
  for (const auto& e : path.events()) row.cell(e.time).cell(e.mark).end();
}

}  // namespace jumpconv
