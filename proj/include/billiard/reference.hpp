#pragma once

// Slow, independent reference computations used to check the library:
// extended-precision power series for J_m, zeros by pure bisection on that
// series, and the closed-form disk normalization (via the standard library,
// since the series cancels badly past x ~ 12).

#include <cmath>
#include <stdexcept>

namespace billiard::reference {

/// J_m(x) from the ascending series in long double; good to ~1e-15 for x <= 12.
inline long double bessel_j_series(int m, long double x) {
  if (m < 0) throw std::invalid_argument("reference::bessel_j_series: m < 0");
  const long double h = x / 2.0L;
  long double term = 1.0L;
  for (int i = 1; i <= m; ++i) term *= h / i;
  long double sum = term;
  const long double q = -h * h;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<long double>(k) * static_cast<long double>(k + m));
    sum += term;
    if (std::fabs(term) < 1e-22L * std::fabs(sum) && k > 5) break;
  }
  return sum;
}

/// The root of J_m on [lo, hi] by bisection to width 1e-15.
inline double bessel_zero_bisect(int m, double lo, double hi) {
  long double a = lo, b = hi;
  long double fa = bessel_j_series(m, a);
  const long double fb = bessel_j_series(m, b);
  if (fa * fb > 0.0L) throw std::invalid_argument("reference::bessel_zero_bisect: no sign change");
  for (int i = 0; i < 200 && b - a > 1e-16L; ++i) {
    const long double c = 0.5L * (a + b);
    const long double fc = bessel_j_series(m, c);
    if (fc == 0.0L) return static_cast<double>(c);
    if ((fa < 0.0L) == (fc < 0.0L)) {
      a = c;
      fa = fc;
    } else {
      b = c;
    }
  }
  return static_cast<double>(0.5L * (a + b));
}

/// A_mn = sqrt(2) / (r0 |J_{|m|+1}(a_mn)|).
inline double mode_norm(int m, double zero, double r0) {
  return std::sqrt(2.0) / (r0 * std::fabs(std::cyl_bessel_j(std::abs(m) + 1, zero)));
}

}  // namespace billiard::reference
