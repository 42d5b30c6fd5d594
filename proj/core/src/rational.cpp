#include "symreduce/rational.hpp"

#include <cmath>
#include <limits>

namespace symreduce {

namespace {

__int128 wide_gcd(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::optional<std::int64_t> integer_root(std::int64_t v, std::int64_t k) {
  if (v < 0) return std::nullopt;
  if (v <= 1) return v;
  auto guess = static_cast<std::int64_t>(
      std::llround(std::pow(static_cast<double>(v), 1.0 / k)));
  for (std::int64_t c = std::max<std::int64_t>(0, guess - 1); c <= guess + 1;
       ++c) {
    __int128 p = 1;
    for (std::int64_t i = 0; i < k && p <= v; ++i) p *= c;
    if (p == v) return c;
  }
  return std::nullopt;
}

}  // namespace

Rational Rational::from_wide(__int128 n, __int128 d) {
  if (d == 0) throw std::domain_error("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  __int128 g = wide_gcd(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  constexpr auto lo = std::numeric_limits<std::int64_t>::min();
  constexpr auto hi = std::numeric_limits<std::int64_t>::max();
  if (n < lo || n > hi || d > hi) throw RationalOverflow("rational overflow");
  Rational r;
  r.num_ = static_cast<std::int64_t>(n);
  r.den_ = static_cast<std::int64_t>(d);
  return r;
}

void Rational::assign(std::int64_t n, std::int64_t d) {
  *this = from_wide(n, d);
}

Rational Rational::pow(std::int64_t e) const {
  if (e < 0) {
    if (num_ == 0) throw std::domain_error("zero to a negative power");
    return Rational(1) / pow(-e);
  }
  Rational result(1);
  Rational base = *this;
  while (e > 0) {
    if (e & 1) result *= base;
    e >>= 1;
    if (e > 0) base *= base;
  }
  return result;
}

std::optional<Rational> Rational::exact_pow(const Rational& e) const {
  if (e.is_integer()) return pow(e.num());
  if (num_ < 0) return std::nullopt;
  auto n = integer_root(num_, e.den());
  auto d = integer_root(den_, e.den());
  if (!n || !d) return std::nullopt;
  return Rational(*n, *d).pow(e.num());
}

Rational Rational::approximate(double x, double tol, std::int64_t max_den) {
  if (!std::isfinite(x)) throw std::domain_error("non-finite value");
  // Continued-fraction convergents.
  double frac = x;
  __int128 p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int it = 0; it < 64; ++it) {
    double a = std::floor(frac);
    auto ai = static_cast<__int128>(a);
    __int128 p2 = ai * p1 + p0;
    __int128 q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    if (std::fabs(static_cast<double>(p1) / static_cast<double>(q1) - x) <= tol)
      break;
    double rem = frac - a;
    if (rem == 0.0) break;
    frac = 1.0 / rem;
  }
  return from_wide(p1, q1);
}

}  // namespace symreduce
