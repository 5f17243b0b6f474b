#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace fieldtail {

// Signed number stored as (sign, log|x|). Sums use log-sum-exp, products
// add logs; exp(log_magnitude) is never formed unless asked for.
struct LogValue {
  double log_magnitude = -std::numeric_limits<double>::infinity();
  int sign = 0;

  static LogValue zero() { return {}; }
  static LogValue from_log(double log_mag, int sgn = 1) {
    if (sgn == 0 || log_mag == -std::numeric_limits<double>::infinity()) return zero();
    return {log_mag, sgn > 0 ? 1 : -1};
  }
  static LogValue from_linear(double x) {
    if (x == 0.0) return zero();
    return {std::log(std::abs(x)), x > 0 ? 1 : -1};
  }

  bool is_zero() const { return sign == 0; }
  double to_linear() const { return sign == 0 ? 0.0 : sign * std::exp(log_magnitude); }

  LogValue operator-() const { return {log_magnitude, -sign}; }

  friend LogValue operator+(const LogValue& a, const LogValue& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const LogValue& big = a.log_magnitude >= b.log_magnitude ? a : b;
    const LogValue& small = a.log_magnitude >= b.log_magnitude ? b : a;
    const double r = std::exp(small.log_magnitude - big.log_magnitude);
    if (big.sign == small.sign) return {big.log_magnitude + std::log1p(r), big.sign};
    if (r == 1.0) return zero();
    return {big.log_magnitude + std::log1p(-r), big.sign};
  }
  friend LogValue operator-(const LogValue& a, const LogValue& b) { return a + (-b); }
  friend LogValue operator*(const LogValue& a, const LogValue& b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return {a.log_magnitude + b.log_magnitude, a.sign * b.sign};
  }
  friend LogValue operator/(const LogValue& a, const LogValue& b) {
    if (a.is_zero()) return zero();
    return {a.log_magnitude - b.log_magnitude, a.sign * b.sign};
  }
};

// log(sum exp(v_i)); -inf for an empty or all -inf input. The reduction
// runs in input order, so callers control reproducibility.
inline double log_sum_exp(std::span<const double> values) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  if (m == -std::numeric_limits<double>::infinity()) return m;
  if (m == std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace fieldtail
