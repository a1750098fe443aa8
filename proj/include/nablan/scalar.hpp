// SPDX-License-Identifier: MIT
//
// Scalar layer: the two field instantiations used throughout (exact rationals
// via GMP's mpq_class, and IEEE double), plus the glue Eigen needs to treat
// mpq_class as a first-class scalar, string/number conversions shared by the
// CLI and I/O layers, and a compensated accumulator for float reductions.

#pragma once

#include <gmpxx.h>

#include <Eigen/Core>

#include <cctype>
#include <cmath>
#include <concepts>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace Eigen {

// mpq_class as an Eigen scalar (the recipe from Eigen's custom-scalar docs).
// Exact arithmetic: epsilon and dummy_precision are genuinely zero.
template <>
struct NumTraits<mpq_class> : GenericNumTraits<mpq_class> {
  typedef mpq_class Real;
  typedef mpq_class NonInteger;
  typedef mpq_class Nested;

  static inline Real epsilon() { return 0; }
  static inline Real dummy_precision() { return 0; }
  static inline int digits10() { return 0; }

  enum {
    IsInteger = 0,
    IsSigned = 1,
    IsComplex = 0,
    RequireInitialization = 1,
    ReadCost = 6,
    AddCost = 150,
    MulCost = 100
  };
};

}  // namespace Eigen

namespace nablan {

using Rational = mpq_class;
using Integer = mpz_class;
using Index = Eigen::Index;

// The toolkit is generic over an ordered field; exactly these two
// instantiations are supported (and they never mix within one expression).
template <class S>
concept ScalarField = std::same_as<S, double> || std::same_as<S, Rational>;

template <ScalarField S>
inline constexpr bool is_exact_v = std::same_as<S, Rational>;

// ---------------------------------------------------------------------------
// Construction helpers.  mpq_class(num, den) does NOT canonicalize on its
// own (mpq_class(2,4) != mpq_class(1,2) without it), so every num/den entry
// point funnels through here.

inline Rational make_rational(long num, long den) {
  if (den == 0) throw std::invalid_argument("make_rational: zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline Rational make_rational(const Integer& num, const Integer& den) {
  if (den == 0) throw std::invalid_argument("make_rational: zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

namespace detail {

inline bool is_integer_token(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

// Base-10 mpz parse.  The plain mpz_class(string) constructor uses base 0,
// which reads leading zeros as octal ("025" -> 21); force decimal and strip
// the '+' sign GMP does not accept.
inline Integer integer_from_token(std::string s) {
  if (!s.empty() && s[0] == '+') s.erase(0, 1);
  return Integer(s, 10);
}

}  // namespace detail

// Parses "p/q", "p", or a plain decimal such as "0.25" / "-1.5e-2" into an
// exact rational (decimals are read exactly: 0.25 -> 1/4).
inline Rational rational_from_string(const std::string& text) {
  const auto fail = [&]() -> Rational {
    throw std::invalid_argument("cannot parse rational: '" + text + "'");
  };

  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) return fail();

  if (auto slash = s.find('/'); slash != std::string::npos) {
    const std::string num = s.substr(0, slash);
    const std::string den = s.substr(slash + 1);
    if (!detail::is_integer_token(num) || !detail::is_integer_token(den)) return fail();
    Integer d = detail::integer_from_token(den);
    if (d == 0) return fail();
    return make_rational(detail::integer_from_token(num), d);
  }

  if (detail::is_integer_token(s)) return Rational(detail::integer_from_token(s));

  // Decimal with optional exponent: [+-]ddd[.ddd][eE[+-]dd]
  long exp10 = 0;
  if (auto e = s.find_first_of("eE"); e != std::string::npos) {
    const std::string tail = s.substr(e + 1);
    if (!detail::is_integer_token(tail)) return fail();
    try {
      exp10 = std::stol(tail);
    } catch (const std::exception&) {
      return fail();
    }
    s = s.substr(0, e);
  }
  const auto dot = s.find('.');
  if (dot == std::string::npos) return fail();
  std::string digits = s.substr(0, dot) + s.substr(dot + 1);
  const long frac_digits = static_cast<long>(s.size() - dot - 1);
  if (digits == "+" || digits == "-" || digits.empty()) return fail();
  if (!detail::is_integer_token(digits)) return fail();

  Integer p = detail::integer_from_token(digits);
  Integer den(1);
  long net = exp10 - frac_digits;
  Integer ten(10);
  if (net >= 0) {
    Integer scale;
    mpz_pow_ui(scale.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(net));
    p *= scale;
  } else {
    mpz_pow_ui(den.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(-net));
  }
  return make_rational(p, den);
}

// Best rational approximation with denominator <= max_den (continued
// fractions with the final semiconvergent considered).  Used when the CLI
// receives a decimal for the exact backend.
inline Rational best_rational_approx(const Rational& x, unsigned long max_den) {
  if (max_den == 0) throw std::invalid_argument("best_rational_approx: max_den == 0");
  if (x.get_den() <= max_den) return x;

  Integer p0(0), q0(1);  // h_{-2}/k_{-2}
  Integer p1(1), q1(0);  // h_{-1}/k_{-1}
  Rational rem = x;
  Integer bound(max_den);

  // Standard continued-fraction loop: a = floor(rem), rem <- 1/(rem - a).
  // The first convergent has denominator 1 <= bound, so q1 > 0 whenever the
  // semiconvergent branch below is taken.
  for (;;) {
    Integer a;
    mpz_fdiv_q(a.get_mpz_t(), rem.get_num().get_mpz_t(), rem.get_den().get_mpz_t());
    Integer p2 = a * p1 + p0;
    Integer q2 = a * q1 + q0;
    if (q2 > bound) {
      // Best semiconvergent with denominator within bound, against the last
      // full convergent; the best approximation is one of the two.
      Integer k = (bound - q0) / q1;
      Rational semi = make_rational(k * p1 + p0, k * q1 + q0);
      Rational conv = make_rational(p1, q1);
      return (abs(x - semi) < abs(x - conv)) ? semi : conv;
    }
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    Rational frac = rem - Rational(a);
    if (frac == 0) return make_rational(p1, q1);  // exact (shouldn't reach: den check above)
    rem = Rational(1) / frac;
  }
}

// Parses "p/q" or any strtod-accepted literal into a double.
inline double double_from_string(const std::string& text) {
  const auto fail = [&]() -> double {
    throw std::invalid_argument("cannot parse number: '" + text + "'");
  };
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) return fail();
  if (auto slash = s.find('/'); slash != std::string::npos) {
    const std::string num = s.substr(0, slash);
    const std::string den = s.substr(slash + 1);
    if (num.empty() || den.empty()) return fail();
    std::size_t pn = 0, pd = 0;
    double a = 0, b = 0;
    try {
      a = std::stod(num, &pn);
      b = std::stod(den, &pd);
    } catch (const std::exception&) {
      return fail();
    }
    if (pn != num.size() || pd != den.size() || b == 0) return fail();
    return a / b;
  }
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    return fail();
  }
  if (pos != s.size()) return fail();
  return v;
}

template <ScalarField S>
S scalar_from_string(const std::string& text) {
  if constexpr (is_exact_v<S>)
    return rational_from_string(text);
  else
    return double_from_string(text);
}

// ---------------------------------------------------------------------------
// Conversions and elementary number theory.

inline double to_double(double x) { return x; }
inline double to_double(const Rational& q) { return q.get_d(); }

template <ScalarField S>
S scalar_from_index(Index k) {
  if constexpr (is_exact_v<S>)
    return Rational(static_cast<long>(k));
  else
    return static_cast<double>(k);
}

template <ScalarField S>
S scalar_from_integer(const Integer& z) {
  if constexpr (is_exact_v<S>)
    return Rational(z);
  else
    return z.get_d();
}

inline Integer factorial_integer(unsigned long k) {
  Integer r;
  mpz_fac_ui(r.get_mpz_t(), k);
  return r;
}

inline Integer binomial_integer(unsigned long n, unsigned long k) {
  Integer r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

// Integer power.  Exact backend inverts for negative exponents; float uses
// std::pow (correctly-rounded enough and branch-free).
template <ScalarField S>
S pow_int(S base, long e) {
  if constexpr (!is_exact_v<S>) {
    return std::pow(base, static_cast<double>(e));
  } else {
    if (e < 0) {
      if (base == 0) throw std::domain_error("pow_int: 0 to a negative power");
      base = Rational(1) / base;
      e = -e;
    }
    Rational r(1);
    while (e) {
      if (e & 1) r *= base;
      base *= base;
      e >>= 1;
    }
    return r;
  }
}

template <ScalarField S>
bool is_finite_scalar(const S& x) {
  if constexpr (is_exact_v<S>)
    return true;
  else
    return std::isfinite(x);
}

template <ScalarField S>
S abs_scalar(const S& x) {
  if constexpr (is_exact_v<S>)
    return abs(x);
  else
    return std::abs(x);
}

// ---------------------------------------------------------------------------
// Printing.  Exact values render as "p" or "p/q"; doubles round-trip.

inline std::string scalar_repr(const Rational& q) { return q.get_str(); }

inline std::string scalar_repr(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Compensated (Neumaier) accumulation.  A no-op wrapper for the exact field,
// a proper compensated sum for double; reductions that feed tolerances
// (probability mass, inner products) go through this.

template <ScalarField S>
class Accumulator {
 public:
  void add(const S& x) { sum_ += x; }
  S total() const { return sum_; }

 private:
  S sum_{0};
};

template <>
class Accumulator<double> {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double total() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace nablan
