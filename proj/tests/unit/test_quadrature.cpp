#include <doctest.h>

#include <cmath>

#include "jumpconv/quadrature.hpp"

using namespace jumpconv;

TEST_CASE("Simpson is exact for cubics") {
  auto f = [](double t) { return 2.0 - t + 3.0 * t * t - 0.5 * t * t * t; };
  auto exact = [](double t) { return 2.0 * t - t * t / 2.0 + t * t * t - t * t * t * t / 8.0; };
  CHECK(simpson(f, 0.3, 2.1, 1, 0.0) == doctest::Approx(exact(2.1) - exact(0.3)).epsilon(1e-14));
  CHECK(simpson(f, 0.3, 2.1, 7, 0.0) == doctest::Approx(exact(2.1) - exact(0.3)).epsilon(1e-14));
}

TEST_CASE("Simpson converges at fourth order") {
  auto f = [](double t) { return std::exp(std::sin(3.0 * t)); };
  const double ref = simpson(f, 0.0, 1.0, 4096, 0.0);
  double prev = std::abs(simpson(f, 0.0, 1.0, 8, 0.0) - ref);
  for (std::size_t n = 16; n <= 64; n *= 2) {
    const double err = std::abs(simpson(f, 0.0, 1.0, n, 0.0) - ref);
    CHECK(std::log2(prev / err) == doctest::Approx(4.0).epsilon(0.1));
    prev = err;
  }
}

TEST_CASE("panel count and default step") {
  CHECK(simpson_panels(1.0, 0.25) == 4);
  CHECK(simpson_panels(1.0, 0.3) == 4);
  CHECK(simpson_panels(0.0, 0.1) == 0);
  CHECK(simpson_panels(1e-9, 0.1) == 1);
  CHECK(QuadratureConfig{}.step(2.0) == 2.0 / 4096.0);
  CHECK(QuadratureConfig{0.01}.step(2.0) == 0.01);
}

TEST_CASE("piecewise Simpson integrates left-continuous steps exactly") {
  // Value 1 on (0, 0.3], 5 on (0.3, 0.71], -2 on (0.71, 1].
  const std::vector<double> breaks{0.3, 0.71};
  auto f = [](double t) { return t <= 0.3 ? 1.0 : (t <= 0.71 ? 5.0 : -2.0); };
  const double exact = 0.3 + 5.0 * 0.41 - 2.0 * 0.29;
  CHECK(piecewise_simpson(f, 0.0, 1.0, 0.1, breaks, 0.0) == doctest::Approx(exact).epsilon(1e-14));
  CHECK(piecewise_simpson(f, 0.3, 0.9, 0.1, breaks, 0.0) == doctest::Approx(5.0 * 0.41 - 2.0 * 0.19).epsilon(1e-14));
  // Without the break list the same rule misses by O(h).
  CHECK(std::abs(simpson(f, 0.0, 1.0, 10, 0.0) - exact) > 1e-3);
}
