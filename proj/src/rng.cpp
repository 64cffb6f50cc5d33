#include "jumpconv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "jumpconv/errors.hpp"

namespace jumpconv {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t x = seed;
  for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t Rng::next_u64() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform_open_left() noexcept {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double Rng::normal() noexcept {
  const double u1 = uniform_open_left();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential(double rate) noexcept { return -std::log(uniform_open_left()) / rate; }

std::uint64_t Rng::poisson(double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw DomainError("poisson: mean must be finite and >= 0");
  if (eta == 0.0) return 0;
  if (eta < 10.0) {
    const double limit = std::exp(-eta);
    double prod = uniform();
    std::uint64_t n = 0;
    while (prod > limit) {
      ++n;
      prod *= uniform();
    }
    return n;
  }
  // PTRS, W. Hormann (1993), "The transformed rejection method for
  // generating Poisson random variables".
  const double slam = std::sqrt(eta);
  const double loglam = std::log(eta);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + eta + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -eta + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

std::size_t Rng::categorical(std::span<const double> cumulative_weights) noexcept {
  const double total = cumulative_weights.back();
  const double target = uniform() * total;
  const auto it = std::upper_bound(cumulative_weights.begin(), cumulative_weights.end(), target);
  const auto k = static_cast<std::size_t>(it - cumulative_weights.begin());
  return std::min(k, cumulative_weights.size() - 1);
}

}  // namespace jumpconv
