#include "esqpt/clebsch_gordan.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>

#include "esqpt/errors.hpp"

namespace esqpt {

namespace {

using i128 = __int128;

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

struct Rational {
  i128 n = 0, d = 1;
  void reduce() {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    const i128 g = gcd128(n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
  }
};

Rational operator+(Rational a, Rational b) {
  const i128 g = gcd128(a.d, b.d);
  Rational r{a.n * (b.d / g) + b.n * (a.d / g), a.d / g * b.d};
  r.reduce();
  return r;
}

Rational operator*(Rational a, Rational b) {
  const i128 g1 = gcd128(a.n, b.d), g2 = gcd128(b.n, a.d);
  Rational r{(a.n / (g1 ? g1 : 1)) * (b.n / (g2 ? g2 : 1)), (a.d / (g2 ? g2 : 1)) * (b.d / (g1 ? g1 : 1))};
  r.reduce();
  return r;
}

i128 factorial(int n) {
  i128 f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

SignedRational clebsch_gordan_squared(int j1, int m1, int j2, int m2, int j, int m) {
  if (j1 < 0 || j2 < 0 || j < 0) throw DomainError("clebsch_gordan: negative angular momentum");
  if (j1 > 8 || j2 > 8 || j > 8) throw UnsupportedError("clebsch_gordan: angular momenta too large for exact arithmetic");
  SignedRational out;
  if (m1 + m2 != m || std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m) > j) return out;
  if (j < std::abs(j1 - j2) || j > j1 + j2) return out;

  // Prefactor (squared) and the alternating sum, both rational.
  Rational pre{(2 * j + 1) * factorial(j1 + j2 - j) * factorial(j1 - j2 + j) * factorial(-j1 + j2 + j),
               factorial(j1 + j2 + j + 1)};
  pre.reduce();
  pre = pre * Rational{factorial(j1 + m1) * factorial(j1 - m1), 1};
  pre = pre * Rational{factorial(j2 + m2) * factorial(j2 - m2), 1};
  pre = pre * Rational{factorial(j + m) * factorial(j - m), 1};

  Rational sum{0, 1};
  for (int k = 0; k <= j1 + j2 - j; ++k) {
    const int a = j1 + j2 - j - k, b = j1 - m1 - k, c = j2 + m2 - k, d = j - j2 + m1 + k, e = j - j1 - m2 + k;
    if (a < 0 || b < 0 || c < 0 || d < 0 || e < 0) continue;
    const i128 den = factorial(k) * factorial(a) * factorial(b) * factorial(c) * factorial(d) * factorial(e);
    sum = sum + Rational{k % 2 == 0 ? 1 : -1, den};
  }
  if (sum.n == 0) return out;
  const Rational sq = pre * sum * sum;
  out.sign = sum.n > 0 ? 1 : -1;
  out.num = sq.n;
  out.den = sq.d;
  return out;
}

double clebsch_gordan(int j1, int m1, int j2, int m2, int j, int m) {
  const SignedRational r = clebsch_gordan_squared(j1, m1, j2, m2, j, m);
  if (r.sign == 0) return 0.0;
  const long double v = std::sqrt(static_cast<long double>(r.num) / static_cast<long double>(r.den));
  return static_cast<double>(r.sign * v);
}

}  // namespace esqpt
