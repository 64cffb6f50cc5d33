#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace jumpconv {

/// Compensator quadrature settings. h = 0 selects the default T / 4096.
struct QuadratureConfig {
  double h = 0.0;

  double step(double horizon) const { return h > 0.0 ? h : horizon / 4096.0; }
};

/// Number of composite Simpson panels of width <= h covering a length.
inline std::size_t simpson_panels(double length, double h) {
  if (!(length > 0.0)) return 0;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(length / h - 1e-12)));
}

/// Composite Simpson rule over [a, b] with `panels` panels (3 nodes each).
/// `init` is the additive zero of the result type.
template <class F, class T>
T simpson(F&& f, double a, double b, std::size_t panels, T init) {
  if (panels == 0 || !(b > a)) return init;
  const double w = (b - a) / static_cast<double>(panels);
  T acc = init;
  for (std::size_t i = 0; i < panels; ++i) {
    const double lo = a + w * static_cast<double>(i);
    const double hi = (i + 1 == panels) ? b : a + w * static_cast<double>(i + 1);
    acc += (hi - lo) / 6.0 * (f(lo) + 4.0 * f(0.5 * (lo + hi)) + f(hi));
  }
  return acc;
}

/// Simpson over [a, b] split at the given sorted break times. Each piece is
/// integrated separately and a piece starting at a break samples its left
/// end just inside the piece, which makes left-continuous step functions
/// exact.
template <class F, class T>
T piecewise_simpson(F&& f, double a, double b, double h, const std::vector<double>& breaks, T init) {
  if (!(b > a)) return init;
  T acc = init;
  double lo = a;
  bool lo_is_break = std::binary_search(breaks.begin(), breaks.end(), a);
  auto piece = [&](double p0, double p1, bool inside) {
    auto g = [&](double s) { return (inside && s == p0) ? f(std::nextafter(s, p1)) : f(s); };
    acc += simpson(g, p0, p1, simpson_panels(p1 - p0, h), init);
  };
  for (auto it = std::upper_bound(breaks.begin(), breaks.end(), a); it != breaks.end() && *it < b; ++it) {
    piece(lo, *it, lo_is_break);
    lo = *it;
    lo_is_break = true;
  }
  piece(lo, b, lo_is_break);
  return acc;
}

}  // namespace jumpconv
