#pragma once

#include <cmath>

namespace spinring {

/// sin(x)/x with a Taylor branch near the removable singularity.
template <typename Scalar>
Scalar sinc(Scalar x) {
  using std::abs;
  using std::sin;
  if (abs(x) < Scalar(1e-4)) {
    const Scalar x2 = x * x;
    return Scalar(1) - x2 / Scalar(6) + x2 * x2 / Scalar(120) - x2 * x2 * x2 / Scalar(5040);
  }
  return sin(x) / x;
}

/// First derivative of sinc.
template <typename Scalar>
Scalar sinc_d1(Scalar x) {
  using std::abs;
  using std::cos;
  using std::sin;
  if (abs(x) < Scalar(1)) {
    // sum_{k>=1} (-1)^k 2k x^(2k-1) / (2k+1)!
    const Scalar x2 = x * x;
    Scalar term = -x / Scalar(3);  // k = 1
    Scalar sum = term;
    for (int k = 2; k <= 14; ++k) {
      term *= -x2 * Scalar(2 * k) / (Scalar(2 * k - 2) * Scalar(2 * k) * Scalar(2 * k + 1));
      sum += term;
    }
    return sum;
  }
  return (x * cos(x) - sin(x)) / (x * x);
}

/// Third derivative of sinc.
template <typename Scalar>
Scalar sinc_d3(Scalar x) {
  using std::abs;
  using std::cos;
  using std::sin;
  if (abs(x) < Scalar(2)) {
    // sum_{k>=2} (-1)^k 2k(2k-1)(2k-2) x^(2k-3) / (2k+1)!
    const Scalar x2 = x * x;
    Scalar sum = 0;
    Scalar power = x;          // x^(2k-3)
    Scalar factorial = 120;    // (2k+1)!
    for (int k = 2; k <= 22; ++k) {
      const Scalar coeff = Scalar(2 * k) * Scalar(2 * k - 1) * Scalar(2 * k - 2);
      sum += ((k % 2 == 0) ? coeff : -coeff) * power / factorial;
      power *= x2;
      factorial *= Scalar(2 * k + 2) * Scalar(2 * k + 3);
    }
    return sum;
  }
  const Scalar x2 = x * x;
  return (-x2 * x * cos(x) + Scalar(3) * x2 * sin(x) + Scalar(6) * x * cos(x) - Scalar(6) * sin(x)) /
         (x2 * x2);
}

/// Divided difference (sinc(v) - sinc(u)) / (v - u), continuous through u == v
/// where it becomes sinc'(u).
template <typename Scalar>
Scalar sinc_divided_difference(Scalar u, Scalar v) {
  using std::abs;
  const Scalar h = v - u;
  if (abs(h) > Scalar(1e-3)) return (sinc(v) - sinc(u)) / h;
  const Scalar mid = (u + v) / Scalar(2);
  return sinc_d1(mid) + h * h / Scalar(24) * sinc_d3(mid);
}

}  // namespace spinring
