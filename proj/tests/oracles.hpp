#pragma once

// Test-only numerical oracles, independent of the library's evaluation paths.

#include <cmath>
#include <functional>

namespace oracle {

// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int n = 20000) {
  if (n % 2) ++n;
  double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Fourth-order central difference of a scalar function.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double h = 1e-3) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) /
         (12 * h);
}

// Second derivative by a five-point stencil.
inline double central_diff2(const std::function<double(double)>& f, double x,
                            double h = 1e-3) {
  return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) -
          f(x - 2 * h)) /
         (12 * h * h);
}

}  // namespace oracle
