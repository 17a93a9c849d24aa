#pragma once

#include <cstddef>

#include "shiftconv/numeric.hpp"
#include "shiftconv/special.hpp"

namespace shiftconv {

// Composite Gauss-Legendre on [a, b] with equal panels; panel sums are added
// left to right so the result is independent of scheduling.
template <class T, class F>
T integrate_gl(F&& f, double a, double b, std::size_t panels, int order = 16) {
  const auto& rule = gauss_legendre(order);
  CompensatedSum<T> total;
  if (panels == 0 || b <= a) return total.value();
  const double h = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + h * static_cast<double>(p);
    const double mid = lo + 0.5 * h;
    T panel{};
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      panel += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
    }
    total.add(panel * (0.5 * h));
  }
  return total.value();
}

}  // namespace shiftconv
