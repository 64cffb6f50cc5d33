#pragma once

// Marked stationary Poisson point processes on [0, T] x Z with an atomic,
// finite intensity measure nu, and the associated (compensated) counting
// measure N((a, b] x B) and N((a, b] x B) - (b - a) nu(B).

#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "jumpconv/rng.hpp"

namespace jumpconv {

/// Finite atomic mark space Z = {z_1, ..., z_m} with intensities nu_k > 0.
class MarkSpace {
 public:
  MarkSpace(std::vector<std::string> names, std::vector<double> weights);
  /// Marks named "z1", "z2", ...
  explicit MarkSpace(std::vector<double> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double weight(std::size_t k) const { return weights_.at(k); }
  double total_rate() const noexcept { return total_rate_; }
  /// Running sums of the weights, used for categorical mark draws.
  std::span<const double> cumulative() const noexcept { return cumulative_; }

 private:
  std::vector<std::string> names_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  double total_rate_ = 0.0;
};

/// Subset B of the mark space, stored as a membership mask.
class MarkSet {
 public:
  MarkSet() = default;
  static MarkSet all(std::size_t n_marks);
  static MarkSet none(std::size_t n_marks);
  static MarkSet only(std::size_t n_marks, std::size_t k);
  static MarkSet of(std::size_t n_marks, std::initializer_list<std::size_t> ks);
  static MarkSet of(std::size_t n_marks, std::span<const std::size_t> ks);

  std::size_t universe() const noexcept { return member_.size(); }
  bool contains(std::size_t k) const noexcept { return k < member_.size() && member_[k]; }
  bool empty() const noexcept;
  bool disjoint(const MarkSet& other) const noexcept;
  MarkSet united(const MarkSet& other) const;
  /// nu(B).
  double measure(const MarkSpace& ms) const;

 private:
  std::vector<bool> member_;
};

struct Event {
  double time;
  std::size_t mark;
};

/// One realisation of the point process on (0, T]. Immutable once built.
class PoissonPath {
 public:
  /// Validates: horizon > 0, times strictly increasing in (0, horizon],
  /// marks < n_marks.
  PoissonPath(double horizon, std::size_t n_marks, std::vector<Event> events, std::uint64_t seed = 0,
              std::size_t collisions = 0);

  double horizon() const noexcept { return horizon_; }
  std::size_t n_marks() const noexcept { return n_marks_; }
  std::span<const Event> events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }
  /// Number of floating-point time collisions resolved while sampling.
  std::size_t collisions() const noexcept { return collisions_; }

  /// Events with time <= t.
  std::span<const Event> prefix(double t) const noexcept;
  /// Events with a < time <= b.
  std::span<const Event> window(double a, double b) const noexcept;

 private:
  double horizon_;
  std::size_t n_marks_;
  std::vector<Event> events_;
  std::uint64_t seed_;
  std::size_t collisions_;
};

/// Poisson(eta) draw.
std::uint64_t sample_count(double eta, Rng& rng);

/// Homogeneous rate-Lambda arrival stream on (0, T] with i.i.d. categorical
/// marks of law nu_k / Lambda.
PoissonPath sample_path(const MarkSpace& ms, double horizon, Rng& rng);
inline PoissonPath sample_path(const MarkSpace& ms, double horizon, Rng&& rng) { return sample_path(ms, horizon, rng); }
PoissonPath sample_path(const MarkSpace& ms, double horizon, std::uint64_t seed);

/// N((a, b] x B).
std::size_t count(const PoissonPath& path, double a, double b, const MarkSet& marks);

/// N((a, b] x B) - (b - a) nu(B).
double compensated(const PoissonPath& path, const MarkSpace& ms, double a, double b, const MarkSet& marks);

/// Audit dump: header "t,mark_index" then one row per event.
void write_path_csv(std::ostream& os, const PoissonPath& path);

}  // namespace jumpconv
