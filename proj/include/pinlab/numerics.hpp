#pragma once

// Log-domain scalars and truncated Taylor jets in the pinning parameter.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pinlab {

class numeric_domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A nonnegative real stored as its natural logarithm. The value 0 is the
/// state with log_magnitude == -inf.
struct LogValue {
  double log_magnitude = -std::numeric_limits<double>::infinity();

  static constexpr LogValue zero() { return {}; }
  static constexpr LogValue one() { return {0.0}; }
  static LogValue from_linear(double x) {
    if (std::isnan(x) || x < 0.0) throw numeric_domain_error("LogValue::from_linear: negative or NaN");
    return {std::log(x)};
  }

  bool is_zero() const { return log_magnitude == -std::numeric_limits<double>::infinity(); }
  double linear() const { return std::exp(log_magnitude); }

  friend LogValue operator*(LogValue a, LogValue b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return {a.log_magnitude + b.log_magnitude};
  }
  friend LogValue operator/(LogValue a, LogValue b) {
    if (b.is_zero()) throw numeric_domain_error("LogValue: division by zero");
    if (a.is_zero()) return zero();
    return {a.log_magnitude - b.log_magnitude};
  }
  friend bool operator==(LogValue, LogValue) = default;
};

namespace detail {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline void reject_nan(double x) {
  if (std::isnan(x)) throw numeric_domain_error("log_sum_exp: NaN input");
}
}  // namespace detail

/// log(sum_i exp(values_i)) over raw log-magnitudes; -inf for an empty input.
inline double log_sum_exp(std::span<const double> values) {
  double mx = detail::kNegInf;
  for (double v : values) {
    detail::reject_nan(v);
    mx = std::max(mx, v);
  }
  if (mx == detail::kNegInf) return mx;
  if (mx == std::numeric_limits<double>::infinity()) return mx;
  double s = 0.0;
  for (double v : values) s += std::exp(v - mx);
  return mx + std::log(s);
}

inline LogValue log_sum_exp(std::span<const LogValue> values) {
  double mx = detail::kNegInf;
  for (auto v : values) {
    detail::reject_nan(v.log_magnitude);
    mx = std::max(mx, v.log_magnitude);
  }
  if (mx == detail::kNegInf) return LogValue::zero();
  double s = 0.0;
  for (auto v : values) s += std::exp(v.log_magnitude - mx);
  return {mx + std::log(s)};
}

inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == detail::kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

/// Streaming log-sum-exp. The running maximum is tracked and the partial sum
/// is rescaled only when the maximum moves.
class LogAccumulator {
 public:
  void add(double log_term) {
    detail::reject_nan(log_term);
    if (log_term == detail::kNegInf) return;
    if (log_term <= max_) {
      sum_ += std::exp(log_term - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
      max_ = log_term;
    }
  }
  void add(LogValue v) { add(v.log_magnitude); }
  double log_value() const { return max_ == detail::kNegInf ? max_ : max_ + std::log(sum_); }
  LogValue value() const { return {log_value()}; }

 private:
  double max_ = detail::kNegInf;
  double sum_ = 0.0;
};

// ---------------------------------------------------------------------------
// Jets
// ---------------------------------------------------------------------------

/// Truncated Taylor expansion in dh of a positive function of h:
///
///   F(h + dh) = exp(scale + tilt * dh) * sum_k coeffs[k] * dh^k,  coeffs[0] = 1.
///
/// With tilt = 0 this is the plain normalized expansion. A nonzero tilt
/// factors an exponential out of the series, so that a partition function
/// whose moment coefficients grow like n^k can be carried as its centered
/// generating function, whose coefficients stay O(n^{k/2}).
struct ScaledJet {
  double scale = 0.0;
  double tilt = 0.0;
  std::vector<double> coeffs;

  ScaledJet() = default;
  explicit ScaledJet(std::size_t order) : coeffs(order + 1, 0.0) { coeffs[0] = 1.0; }

  std::size_t order() const { return coeffs.size() - 1; }

  static ScaledJet constant(std::size_t order, double log_value) {
    ScaledJet j(order);
    j.scale = log_value;
    return j;
  }
  /// exp(log_value + slope * dh), stored exactly through the tilt.
  static ScaledJet exponential(std::size_t order, double log_value, double slope) {
    ScaledJet j(order);
    j.scale = log_value;
    j.tilt = slope;
    return j;
  }
  /// Plain polynomial c_0 + c_1 dh + ... with c_0 > 0.
  static ScaledJet from_polynomial(std::span<const double> c) {
    if (c.empty() || !(c[0] > 0.0)) throw numeric_domain_error("ScaledJet: zeroth coefficient must be positive");
    ScaledJet j(c.size() - 1);
    j.scale = std::log(c[0]);
    for (std::size_t k = 0; k < c.size(); ++k) j.coeffs[k] = c[k] / c[0];
    return j;
  }

  /// Coefficients of the series with the tilt multiplied back in (tilt 0 form).
  std::vector<double> expanded_coeffs() const;
  /// Value at dh relative to exp(scale).
  double evaluate_relative(double dh) const {
    double acc = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * dh + coeffs[k];
    return std::exp(tilt * dh) * acc;
  }
};

namespace detail {

inline void require_same_order(const ScaledJet& a, const ScaledJet& b) {
  if (a.coeffs.size() != b.coeffs.size())
    throw std::invalid_argument("jet order mismatch: " + std::to_string(a.order()) + " vs " + std::to_string(b.order()));
}

/// out = series(in) * exp(d * dh), truncated.
inline void multiply_by_exponential(std::span<const double> in, double d, std::span<double> out) {
  const std::size_t n = in.size();
  if (d == 0.0) {
    std::copy(in.begin(), in.end(), out.begin());
    return;
  }
  // e_k = d^k / k!
  double e[64];
  const std::size_t m = std::min<std::size_t>(n, 64);
  e[0] = 1.0;
  for (std::size_t k = 1; k < m; ++k) e[k] = e[k - 1] * d / static_cast<double>(k);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i <= k; ++i) s += in[i] * e[k - i];
    out[k] = s;
  }
}

inline void convolve(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  const std::size_t n = out.size();
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i <= k; ++i) s += a[i] * b[k - i];
    out[k] = s;
  }
}

}  // namespace detail

inline std::vector<double> ScaledJet::expanded_coeffs() const {
  std::vector<double> out(coeffs.size());
  detail::multiply_by_exponential(coeffs, tilt, out);
  return out;
}

/// Rescales so that coeffs[0] == 1 exactly.
inline void normalize(ScaledJet& j) {
  const double c0 = j.coeffs[0];
  if (!(c0 > 0.0)) throw numeric_domain_error("ScaledJet: nonpositive zeroth coefficient");
  j.scale += std::log(c0);
  for (auto& c : j.coeffs) c /= c0;
  j.coeffs[0] = 1.0;
}

/// Moves the first-order coefficient into the tilt, leaving coeffs[1] == 0.
inline void recenter(ScaledJet& j) {
  if (j.coeffs.size() < 2) return;
  const double m = j.coeffs[1];  // coeffs[0] == 1, so this is d/dh log F at dh = 0
  if (m == 0.0) return;
  std::vector<double> tmp(j.coeffs.size());
  detail::multiply_by_exponential(j.coeffs, -m, tmp);
  j.coeffs.swap(tmp);
  j.coeffs[1] = 0.0;
  j.tilt += m;
}

inline ScaledJet jet_mul(const ScaledJet& a, const ScaledJet& b) {
  detail::require_same_order(a, b);
  ScaledJet out(a.order());
  detail::convolve(a.coeffs, b.coeffs, out.coeffs);
  out.scale = a.scale + b.scale;
  out.tilt = a.tilt + b.tilt;
  normalize(out);
  return out;
}

/// acc + weight * factor, renormalized. `weight` is a constant in h; a
/// Boltzmann factor e^{h+omega} is expressed as ScaledJet::exponential(R, h+omega, 1).
/// The result keeps acc's tilt (or factor's, when acc is the zero jet).
inline ScaledJet jet_mul_acc(const ScaledJet& acc, const ScaledJet& factor, LogValue weight) {
  detail::require_same_order(acc, factor);
  if (weight.is_zero()) return acc;
  const double term_scale = factor.scale + weight.log_magnitude;
  if (acc.scale == detail::kNegInf) {
    ScaledJet out = factor;
    out.scale = term_scale;
    return out;
  }
  ScaledJet out(acc.order());
  out.tilt = acc.tilt;
  const double mx = std::max(acc.scale, term_scale);
  const double wa = std::exp(acc.scale - mx);
  const double wb = std::exp(term_scale - mx);
  std::vector<double> shifted(factor.coeffs.size());
  detail::multiply_by_exponential(factor.coeffs, factor.tilt - acc.tilt, shifted);
  for (std::size_t k = 0; k < out.coeffs.size(); ++k) out.coeffs[k] = wa * acc.coeffs[k] + wb * shifted[k];
  out.scale = mx;
  normalize(out);
  return out;
}

/// The zero jet, the identity for jet_mul_acc.
inline ScaledJet jet_zero(std::size_t order) {
  ScaledJet j(order);
  j.scale = detail::kNegInf;
  return j;
}

/// Taylor coefficients of log F at h: entries 0..R, entry 0 = log F(h).
/// k! times entry k is the k-th derivative of log F.
inline std::vector<double> log_of_jet(const ScaledJet& j) {
  const std::size_t n = j.coeffs.size();
  if (!(j.coeffs[0] > 0.0) || !std::isfinite(j.scale)) throw numeric_domain_error("log_of_jet: nonpositive jet");
  const auto& a = j.coeffs;
  const double a0 = a[0];
  std::vector<double> l(n, 0.0);
  // (log a)' = a'/a  =>  k a_k = sum_{i=1..k} i l_i a_{k-i}
  for (std::size_t k = 1; k < n; ++k) {
    double s = static_cast<double>(k) * a[k];
    for (std::size_t i = 1; i < k; ++i) s -= static_cast<double>(i) * l[i] * a[k - i];
    l[k] = s / (static_cast<double>(k) * a0);
  }
  l[0] = j.scale + std::log(a0);
  if (n > 1) l[1] += j.tilt;
  return l;
}

/// exp of a Taylor series with given coefficients (the inverse of log_of_jet).
inline ScaledJet jet_exp(std::span<const double> log_coeffs) {
  const std::size_t n = log_coeffs.size();
  ScaledJet j(n - 1);
  j.scale = log_coeffs[0];
  auto& b = j.coeffs;
  // b' = b * l'  =>  k b_k = sum_{i=1..k} i l_i b_{k-i}
  for (std::size_t k = 1; k < n; ++k) {
    double s = 0.0;
    for (std::size_t i = 1; i <= k; ++i) s += static_cast<double>(i) * log_coeffs[i] * b[k - i];
    b[k] = s / static_cast<double>(k);
  }
  return j;
}

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace pinlab
