#pragma once

#include <cstdint>
#include <span>

namespace jumpconv {

/// xoshiro256** seeded through splitmix64.
///
/// A generator is fully determined by its 64-bit seed. Monte Carlo loops
/// derive one independent substream per path with `Rng::substream(seed, i)`,
/// which seeds a fresh generator with `seed ^ i`; splitmix64 decorrelates
/// neighbouring seeds, so the substreams can be generated in any order or
/// concurrently with bit-identical results.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  static Rng substream(std::uint64_t base_seed, std::uint64_t index) {
    return Rng(base_seed ^ index);
  }

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1].
  double uniform_open_left() noexcept;
  double normal() noexcept;
  double exponential(double rate) noexcept;
  /// Poisson(eta). Inversion for small means, Hormann's PTRS otherwise.
  std::uint64_t poisson(double eta);
  /// Index k with probability weights[k] / sum(weights).
  std::size_t categorical(std::span<const double> cumulative_weights) noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

}  // namespace jumpconv
