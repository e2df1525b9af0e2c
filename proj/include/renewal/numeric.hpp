#pragma once

/// Scalar types and small numerical building blocks shared by every module:
/// exact rationals, the fixed set of extended float precisions, compensated
/// summation, least-squares line fits and closed-form gamma tails.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/gmp.hpp>

#include "renewal/error.hpp"

namespace renewal {

using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

/// 113-bit significand (IEEE binary128 layout).
using Quad = boost::multiprecision::cpp_bin_float_quad;
/// 237-bit significand (IEEE binary256 layout).
using Octuple = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<237, boost::multiprecision::digit_base_2, void,
                                         std::int32_t, -262142, 262143>,
    boost::multiprecision::et_off>;

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

template <class T>
double to_double(const T& x) {
  if constexpr (std::is_floating_point_v<T>) {
    return static_cast<double>(x);
  } else {
    return x.template convert_to<double>();
  }
}

/// Converts an exact rational into any supported scalar.
template <class T>
T rational_to(const Rational& q) {
  if constexpr (is_exact_v<T>) {
    return q;
  } else if constexpr (std::is_floating_point_v<T>) {
    return q.convert_to<T>();
  } else {
    return T(boost::multiprecision::numerator(q)) / T(boost::multiprecision::denominator(q));
  }
}

/// Converts a double into any supported scalar; exact for Rational.
template <class T>
T from_double(double x) {
  if constexpr (is_exact_v<T>) {
    return Rational(x);
  } else {
    return T(x);
  }
}

template <class T>
T abs_of(const T& x) {
  if constexpr (std::is_floating_point_v<T>) {
    return std::fabs(x);
  } else {
    return T(boost::multiprecision::abs(x));
  }
}

template <class T>
bool is_finite_value(const T& x) {
  if constexpr (is_exact_v<T>) {
    return true;
  } else if constexpr (std::is_floating_point_v<T>) {
    return std::isfinite(x);
  } else {
    return boost::multiprecision::isfinite(x);
  }
}

/// log|x| for x != 0; stays finite for rationals far outside the double range.
template <class T>
double log_abs(const T& x) {
  if constexpr (is_exact_v<T>) {
    auto log_int = [](const BigInt& z) {
      long e = 0;
      double m = mpz_get_d_2exp(&e, z.backend().data());
      return std::log(std::fabs(m)) + static_cast<double>(e) * std::log(2.0);
    };
    return log_int(boost::multiprecision::numerator(x)) - log_int(boost::multiprecision::denominator(x));
  } else if constexpr (std::is_floating_point_v<T>) {
    return std::log(std::fabs(x));
  } else {
    return to_double(T(boost::multiprecision::log(abs_of(x))));
  }
}

/// base^n by repeated squaring; exact for Rational.
template <class T>
T power(T base, std::size_t n) {
  T result(1);
  while (n > 0) {
    if (n & 1U) result *= base;
    base *= base;
    n >>= 1U;
  }
  return result;
}

/// Parses "p/q", an integer, or a decimal ("-0.6", "1.5e-3") into an exact
/// rational.
inline Rational parse_rational(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text.empty()) throw ModelError("empty rational literal");

  // GMP reads a leading 0 as an octal prefix
  auto decimal = [](std::string digits) {
    std::size_t lead = digits.find_first_not_of('0');
    return BigInt(lead == std::string::npos ? std::string("0") : digits.substr(lead));
  };

  auto parse_integer = [&](std::string_view s) -> BigInt {
    s = trim(s);
    std::string digits;
    bool minus = false;
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
      minus = s[i] == '-';
      ++i;
    }
    if (i == s.size()) throw ModelError("malformed rational literal '" + std::string(text) + "'");
    for (; i < s.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i])))
        throw ModelError("malformed rational literal '" + std::string(text) + "'");
      digits.push_back(s[i]);
    }
    BigInt v = decimal(digits);
    return minus ? BigInt(-v) : v;
  };

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    BigInt num = parse_integer(text.substr(0, slash));
    BigInt den = parse_integer(text.substr(slash + 1));
    if (den == 0) throw ModelError("zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
  }

  // decimal with optional fraction and exponent
  std::string mantissa;
  long exponent = 0;
  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') {
    negative = text[i] == '-';
    ++i;
  }
  bool seen_digit = false;
  bool in_fraction = false;
  for (; i < text.size(); ++i) {
    char ch = text[i];
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      mantissa.push_back(ch);
      seen_digit = true;
      if (in_fraction) --exponent;
    } else if (ch == '.' && !in_fraction) {
      in_fraction = true;
    } else if (ch == 'e' || ch == 'E') {
      std::string_view rest = text.substr(i + 1);
      BigInt e = parse_integer(rest);
      exponent += e.convert_to<long>();
      i = text.size();
      break;
    } else {
      throw ModelError("malformed rational literal '" + std::string(text) + "'");
    }
  }
  if (!seen_digit) throw ModelError("malformed rational literal '" + std::string(text) + "'");
  BigInt value = decimal(mantissa);
  if (negative) value = -value;
  BigInt ten_power = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::labs(exponent)));
  return exponent >= 0 ? Rational(value * ten_power) : Rational(value, ten_power);
}

/// Neumaier-compensated accumulator; plain exact addition for Rational.
template <class T>
class CompensatedSum {
 public:
  void add(const T& x) {
    if constexpr (is_exact_v<T>) {
      sum_ += x;
    } else {
      T t = sum_ + x;
      if (abs_of(sum_) >= abs_of(x)) {
        comp_ += (sum_ - t) + x;
      } else {
        comp_ += (x - t) + sum_;
      }
      sum_ = t;
    }
  }
  CompensatedSum& operator+=(const T& x) {
    add(x);
    return *this;
  }
  [[nodiscard]] T value() const {
    if constexpr (is_exact_v<T>) {
      return sum_;
    } else {
      return sum_ + comp_;
    }
  }

 private:
  T sum_{0};
  T comp_{0};
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum<double> acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y ≈ intercept + slope·x. r2 is 1 when the data
/// carry no variance.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("fit_line needs at least two paired points");
  const double n = static_cast<double>(x.size());
  double mx = compensated_sum(x) / n;
  double my = compensated_sum(y) / n;
  CompensatedSum<double> sxx, sxy, syy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxx.add(dx * dx);
    sxy.add(dx * dy);
    syy.add(dy * dy);
  }
  if (sxx.value() <= 0.0) throw ArgumentError("fit_line: abscissae are all equal");
  LinearFit fit;
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = my - fit.slope * mx;
  fit.points = x.size();
  double ss_tot = syy.value();
  CompensatedSum<double> ss_res;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double e = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res.add(e * e);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res.value() / ss_tot : 1.0;
  return fit;
}

/// ∫_z^∞ x^k e^{-x} dx for integer k ≥ 0, i.e. k! e^{-z} Σ_{m≤k} z^m/m!.
inline double upper_gamma_int(int k, double z) {
  double term = 1.0;
  double series = 1.0;
  for (int m = 1; m <= k; ++m) {
    term *= z / m;
    series += term;
  }
  return std::tgamma(k + 1.0) * std::exp(-z) * series;
}

/// ∫_a^∞ x^k e^{-λx} dx for λ > 0.
inline double exp_moment_tail(int k, double lambda, double a) {
  if (lambda <= 0.0) return std::numeric_limits<double>::infinity();
  return upper_gamma_int(k, lambda * a) / std::pow(lambda, k + 1);
}

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive 15-point Gauss–Kronrod on [lo, hi].
template <class F>
QuadratureResult integrate_adaptive(F&& f, double lo, double hi, double tol = 1e-12, unsigned max_depth = 20) {
  QuadratureResult out;
  if (hi == lo) return out;
  out.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      std::forward<F>(f), lo, hi, max_depth, tol, &out.error);
  // boost reports the Kronrod–Gauss gap on the [-1, 1]-mapped panels
  out.error = std::fabs(out.error) * 0.5 * std::fabs(hi - lo);
  return out;
}

/// Fixed 8-point Gauss–Legendre on [lo, hi].
template <class F>
double integrate_gauss8(F&& f, double lo, double hi) {
  return boost::math::quadrature::gauss<double, 8>::integrate(std::forward<F>(f), lo, hi);
}

}  // namespace renewal
