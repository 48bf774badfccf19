#pragma once

#include <cmath>
#include <limits>

namespace paperrank::lda {

/// Digamma for x > 0: recurrence psi(x) = psi(x+1) - 1/x until x > 6, then
/// the asymptotic series in 1/x^2 truncated after eight terms.
inline double digamma(double x) {
  if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  double shift = 0.0;
  while (x <= 6.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli-number coefficients B_{2n} / (2n).
  const double series =
      inv2 * (1.0 / 12 -
      inv2 * (1.0 / 120 -
      inv2 * (1.0 / 252 -
      inv2 * (1.0 / 240 -
      inv2 * (1.0 / 132 -
      inv2 * (691.0 / 32760 -
      inv2 * (1.0 / 12)))))));
  return shift + std::log(x) - 0.5 * inv - series;
}

}  // namespace paperrank::lda
