#pragma once

// Independent reference evaluation of the survival formulas for tests.
// Uses long double power series only; nothing here calls <cmath> exp/log or
// any code from escape_core, so it can check the library's results.

namespace oracle {

using real = long double;

inline constexpr real kPi = 3.14159265358979323846264338327950288L;
inline constexpr real kE = 2.71828182845904523536028747135266250L;

inline real abs(real x) { return x < 0 ? -x : x; }

/// exp(x) by halving the argument until |x| < 1/64, a Taylor series, then
/// repeated squaring.
inline real exp(real x) {
  int halvings = 0;
  while (abs(x) > 1.0L / 64) {
    x /= 2;
    ++halvings;
  }
  real term = 1;
  real sum = 1;
  for (int n = 1; n < 30; ++n) {
    term *= x / n;
    sum += term;
  }
  while (halvings-- > 0) {
    sum *= sum;
  }
  return sum;
}

/// ln(x) for x > 0 via ln(x) = 2 atanh((x-1)/(x+1)) after scaling into
/// [0.5, 2) by powers of two.
inline real log(real x) {
  auto atanh_series = [](real z) {
    real z2 = z * z;
    real power = z;
    real sum = 0;
    for (int n = 1; n < 400; n += 2) {
      sum += power / n;
      power *= z2;
    }
    return 2 * sum;
  };
  static const real ln2 = atanh_series(1.0L / 3);  // ln 2 = 2 atanh(1/3)
  int k = 0;
  while (x >= 2) {
    x /= 2;
    ++k;
  }
  while (x < 0.5L) {
    x *= 2;
    --k;
  }
  return atanh_series((x - 1) / (x + 1)) + k * ln2;
}

inline real distinct_sites(real t) { return kPi * t / log(t); }

inline real detection_fraction(real t_d) { return 1 - exp(-t_d); }

inline real p_static(real t, real n, real v, real fraction = 1) {
  return exp(-(n / v) * fraction * distinct_sites(t));
}

inline real p_mobile(real t, real n, real v, real fraction = 1) {
  const real rho = n / v;
  return exp(rho * rho * log(p_static(t, n, v, fraction)));
}

inline real logistic(real n0, real k, real mu, real t) {
  const real g = n0 * exp(k * t);
  return mu * g / (g + mu - n0);
}

inline real exponential(real n0, real k, real t) { return n0 * exp(k * t); }

}  // namespace oracle
