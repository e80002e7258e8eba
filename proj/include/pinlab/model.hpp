#pragma once

// Inter-arrival laws, disorder laws and reproducible disorder streams.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "pinlab/numerics.hpp"

namespace pinlab {

// ---------------------------------------------------------------------------
// Inter-arrival law
// ---------------------------------------------------------------------------

struct EllConstant {
  double c = 1.0;
  friend bool operator==(const EllConstant&, const EllConstant&) = default;
};
/// ell(t) = c * (1 + log t)^beta
struct EllLogPower {
  double c = 1.0;
  double beta = 0.0;
  friend bool operator==(const EllLogPower&, const EllLogPower&) = default;
};
using EllSpec = std::variant<EllConstant, EllLogPower>;

/// log ell at the point e^{log_t}.
inline double log_ell_at_log(const EllSpec& ell, double log_t) {
  return std::visit(
      [log_t](const auto& e) -> double {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, EllConstant>) {
          return std::log(e.c);
        } else {
          return std::log(e.c) + e.beta * std::log1p(log_t);
        }
      },
      ell);
}

inline double log_ell(const EllSpec& ell, double t) { return log_ell_at_log(ell, std::log(t)); }

class InterArrivalLaw {
 public:
  enum class Kind { regularly_varying, raw_table };

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  const EllSpec& ell() const { return ell_; }
  int n_max() const { return static_cast<int>(log_p_.size()); }
  bool normalized() const { return normalized_; }
  double xi() const { return xi_; }
  /// Constant added to log ell(t) - (alpha+1) log t by normalization.
  double log_shift() const { return log_shift_; }

  /// log p(t) for 1 <= t <= n_max.
  double log_p(int t) const { return log_p_[static_cast<std::size_t>(t - 1)]; }
  const std::vector<double>& log_p_table() const { return log_p_; }

  /// log p(t) for any t >= 1: the tabulated value inside the horizon, the
  /// closed form beyond it, -inf beyond a raw table.
  double log_p_extended(double t) const {
    if (t <= n_max()) return log_p(static_cast<int>(t));
    if (kind_ == Kind::raw_table) return -std::numeric_limits<double>::infinity();
    return log_shift_ + log_ell(ell_, t) - (alpha_ + 1.0) * std::log(t);
  }

  /// Mass of the law beyond the tabulation horizon (0 for raw tables).
  double tail_mass() const { return tail_mass_; }
  double total_mass() const {
    double s = 0.0;
    for (double lp : log_p_) s += std::exp(lp);
    return s + tail_mass_;
  }

  /// Arbitrary positive table, t = 1..size. Used for test laws such as
  /// p(t) = 2^{-t} that need not be regularly varying.
  static InterArrivalLaw from_table(std::vector<double> log_p);

  friend InterArrivalLaw build_law(double alpha, const EllSpec& ell, int n_max, bool normalize);
  friend double compute_xi(InterArrivalLaw& law);

 private:
  Kind kind_ = Kind::raw_table;
  double alpha_ = 1.0;
  EllSpec ell_ = EllConstant{};
  bool normalized_ = false;
  double log_shift_ = 0.0;
  double tail_mass_ = 0.0;
  double xi_ = 0.0;
  std::vector<double> log_p_;
};

namespace detail {

/// sum_{t > N} ell(t) t^{-alpha-1} by the integral from N plus the first
/// Euler-Maclaurin corrections.
inline double regularly_varying_tail(double alpha, const EllSpec& ell, int n) {
  const double N = n;
  auto g = [&](double x) { return std::exp(log_ell(ell, x) - (alpha + 1.0) * std::log(x)); };
  // x = N e^u
  const double log_n = std::log(N);
  auto integrand = [&](double u) { return std::exp(log_ell_at_log(ell, log_n + u) - alpha * u); };
  boost::math::quadrature::exp_sinh<double> integrator;
  const double integral = std::pow(N, -alpha) * integrator.integrate(integrand);
  const double h = 1e-3 * N;
  const double gprime = (g(N + h) - g(N - h)) / (2.0 * h);
  return integral - 0.5 * g(N) - gprime / 12.0;
}

/// For each m, the largest log p(t+tau) - log p(t) - log p(tau) over pairs
/// with min(t, tau) == m and t + tau <= n_max.
inline std::vector<double> pair_excess_by_min(const std::vector<double>& log_p) {
  const int n = static_cast<int>(log_p.size());
  std::vector<double> best(static_cast<std::size_t>(n / 2 + 1), -std::numeric_limits<double>::infinity());
  for (int m = 1; 2 * m <= n; ++m) {
    double b = best[m];
    const double lm = log_p[m - 1];
    for (int t = m; t + m <= n; ++t) b = std::max(b, log_p[t + m - 1] - log_p[t - 1] - lm);
    best[m] = b;
  }
  return best;
}

inline bool xi_satisfies(const std::vector<double>& best, double xi) {
  const double lx = std::log(xi);
  for (std::size_t m = 1; m < best.size(); ++m)
    if (best[m] > lx + xi * std::log(static_cast<double>(m)) + 1e-12) return false;
  return true;
}

}  // namespace detail

/// Smallest xi on a 1e-3 grid such that
///   p(t+tau) <= xi * min(t,tau)^xi * p(t) p(tau)   for all t + tau <= n_max.
/// The value is also stored in the law.
inline double compute_xi(InterArrivalLaw& law) {
  constexpr double kStep = 1e-3;
  const auto best = detail::pair_excess_by_min(law.log_p_);
  if (best.size() <= 1) {
    law.xi_ = kStep;
    return law.xi_;
  }
  long hi = 1;
  while (!detail::xi_satisfies(best, hi * kStep)) {
    hi *= 2;
    if (hi > (1L << 60)) throw numeric_domain_error("compute_xi: no finite xi found");
  }
  long lo = 0;  // invariant: lo fails (or is 0), hi passes
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (detail::xi_satisfies(best, mid * kStep))
      hi = mid;
    else
      lo = mid;
  }
  law.xi_ = hi * kStep;
  return law.xi_;
}

inline InterArrivalLaw InterArrivalLaw::from_table(std::vector<double> log_p) {
  if (log_p.empty()) throw std::invalid_argument("from_table: empty table");
  for (double v : log_p)
    if (!std::isfinite(v)) throw std::invalid_argument("from_table: p(t) must be positive and finite");
  InterArrivalLaw law;
  law.kind_ = Kind::raw_table;
  law.log_p_ = std::move(log_p);
  compute_xi(law);
  return law;
}

/// p(t) = ell(t) / t^{alpha+1}, t = 1..n_max, optionally rescaled so that the
/// tabulated mass plus the analytic tail equals 1.
inline InterArrivalLaw build_law(double alpha, const EllSpec& ell, int n_max, bool normalize) {
  if (!(alpha >= 1.0)) throw std::invalid_argument("build_law: alpha must be >= 1");
  if (n_max < 2) throw std::invalid_argument("build_law: n_max must be >= 2");
  const bool ell_ok = std::visit([](const auto& e) { return e.c > 0.0 && std::isfinite(e.c); }, ell);
  if (!ell_ok) throw std::invalid_argument("build_law: ell must be positive");
  InterArrivalLaw law;
  law.kind_ = InterArrivalLaw::Kind::regularly_varying;
  law.alpha_ = alpha;
  law.ell_ = ell;
  law.log_p_.resize(static_cast<std::size_t>(n_max));
  for (int t = 1; t <= n_max; ++t)
    law.log_p_[t - 1] = log_ell(ell, t) - (alpha + 1.0) * std::log(static_cast<double>(t));
  law.tail_mass_ = detail::regularly_varying_tail(alpha, ell, n_max);
  if (normalize) {
    const double total = law.total_mass();
    const double shift = -std::log(total);
    for (auto& v : law.log_p_) v += shift;
    law.log_shift_ = shift;
    law.tail_mass_ *= std::exp(shift);
    law.normalized_ = true;
  }
  compute_xi(law);
  return law;
}

/// Geometric test law p(t) = q (1-q)^{t-1} scaled by `mass`.
inline InterArrivalLaw geometric_law(double ratio, int n_max, double mass = 1.0) {
  std::vector<double> lp(static_cast<std::size_t>(n_max));
  // p(t) = mass * (1 - ratio) * ratio^{t-1}
  for (int t = 1; t <= n_max; ++t) lp[t - 1] = std::log(mass) + std::log1p(-ratio) + (t - 1) * std::log(ratio);
  return InterArrivalLaw::from_table(std::move(lp));
}

// ---------------------------------------------------------------------------
// h_c classification
// ---------------------------------------------------------------------------

enum class HcClass { finite, minus_infinity, undecided };

inline const char* to_string(HcClass c) {
  switch (c) {
    case HcClass::finite: return "finite";
    case HcClass::minus_infinity: return "minus_infinity";
    case HcClass::undecided: return "undecided";
  }
  return "?";
}

/// varrho may be +inf.
inline HcClass classify_hc(double alpha, double varrho) {
  if (!(alpha >= 1.0) || !(varrho > 0.0)) throw std::invalid_argument("classify_hc: need alpha >= 1, varrho > 0");
  const double q = (alpha + 1.0) * varrho;
  if (q > 1.0) return HcClass::finite;
  if (q < 1.0) return HcClass::minus_infinity;
  return HcClass::undecided;
}

// ---------------------------------------------------------------------------
// Counter-based random streams
// ---------------------------------------------------------------------------

inline constexpr const char* kSeedScheme = "splitmix64-counter-v1";

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Output k of stream (master, index) is mix64(key + k * golden) with
/// key = mix64(master ^ mix64(index)); streams are disjoint functions of the
/// pair and need no shared state.
class CounterRng {
 public:
  using result_type = std::uint64_t;
  CounterRng(std::uint64_t master_seed, std::uint64_t stream)
      : key_(mix64(master_seed ^ mix64(stream ^ 0xD1B54A32D192ED03ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return mix64(key_ + 0x9E3779B97F4A7C15ULL * counter_++); }

  /// Uniform on (0, 1), 53-bit resolution, never 0.
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Disorder law
// ---------------------------------------------------------------------------

enum class DisorderFamily { zero, gaussian, uniform_centered, rademacher, shifted_exponential };

inline const char* to_string(DisorderFamily f) {
  switch (f) {
    case DisorderFamily::zero: return "zero";
    case DisorderFamily::gaussian: return "gaussian";
    case DisorderFamily::uniform_centered: return "uniform_centered";
    case DisorderFamily::rademacher: return "rademacher";
    case DisorderFamily::shifted_exponential: return "shifted_exponential";
  }
  return "?";
}

inline DisorderFamily disorder_family_from_string(const std::string& s) {
  for (auto f : {DisorderFamily::zero, DisorderFamily::gaussian, DisorderFamily::uniform_centered,
                 DisorderFamily::rademacher, DisorderFamily::shifted_exponential})
    if (s == to_string(f)) return f;
  throw std::invalid_argument("unknown disorder family '" + s + "'");
}

/// Mean-zero i.i.d. charges. `param` is sigma (gaussian), the half-width a
/// (uniform on [-a, a]), the amplitude s (+-s), or lambda (lambda*(E-1) with
/// E ~ Exp(1)).
struct DisorderLaw {
  DisorderFamily family = DisorderFamily::zero;
  double param = 0.0;

  static DisorderLaw zero() { return {}; }
  static DisorderLaw gaussian(double sigma) { return {DisorderFamily::gaussian, sigma}; }
  static DisorderLaw uniform_centered(double a) { return {DisorderFamily::uniform_centered, a}; }
  static DisorderLaw rademacher(double s) { return {DisorderFamily::rademacher, s}; }
  static DisorderLaw shifted_exponential(double lambda) { return {DisorderFamily::shifted_exponential, lambda}; }

  bool is_pure() const { return family == DisorderFamily::zero || param == 0.0; }

  double mean() const { return 0.0; }
  double variance() const {
    switch (family) {
      case DisorderFamily::zero: return 0.0;
      case DisorderFamily::gaussian: return param * param;
      case DisorderFamily::uniform_centered: return param * param / 3.0;
      case DisorderFamily::rademacher: return param * param;
      case DisorderFamily::shifted_exponential: return param * param;
    }
    return 0.0;
  }

  /// sup{z >= 0 : E e^{z omega} < inf}; +inf for light tails.
  double varrho() const {
    if (family == DisorderFamily::shifted_exponential && param > 0.0) return 1.0 / param;
    return std::numeric_limits<double>::infinity();
  }

  /// An eta with E e^{eta |omega|} finite.
  double eta() const {
    if (family == DisorderFamily::shifted_exponential && param > 0.0) return 0.5 / param;
    return 1.0;
  }

  /// E e^{eta |omega_0|} in closed form; +inf when it diverges.
  double exp_abs_moment(double eta_) const {
    const double inf = std::numeric_limits<double>::infinity();
    switch (family) {
      case DisorderFamily::zero: return 1.0;
      case DisorderFamily::gaussian: {
        const double s = eta_ * param;
        return 2.0 * std::exp(0.5 * s * s) * 0.5 * boost::math::erfc(-s / std::numbers::sqrt2);
      }
      case DisorderFamily::uniform_centered:
        if (param == 0.0) return 1.0;
        return std::expm1(eta_ * param) / (eta_ * param);
      case DisorderFamily::rademacher: return std::exp(eta_ * param);
      case DisorderFamily::shifted_exponential: {
        const double l = param;
        if (l == 0.0) return 1.0;
        if (eta_ * l >= 1.0) return inf;
        // omega = l(E - 1): |omega| = l(1-E) on E < 1, l(E-1) on E > 1.
        const double below = std::exp(eta_ * l) * (1.0 - std::exp(-(1.0 + eta_ * l))) / (1.0 + eta_ * l);
        const double above = std::exp(-1.0) / (1.0 - eta_ * l);
        return below + above;
      }
    }
    return inf;
  }

  /// log E e^{omega_0}; +inf when it diverges. Annealed shift of h.
  double log_mgf_at_one() const {
    switch (family) {
      case DisorderFamily::zero: return 0.0;
      case DisorderFamily::gaussian: return 0.5 * param * param;
      case DisorderFamily::uniform_centered: return param == 0.0 ? 0.0 : std::log(std::sinh(param) / param);
      case DisorderFamily::rademacher: return std::log(std::cosh(param));
      case DisorderFamily::shifted_exponential:
        if (param >= 1.0) return std::numeric_limits<double>::infinity();
        return -param - std::log1p(-param);
    }
    return 0.0;
  }

  double draw(CounterRng& rng) const {
    switch (family) {
      case DisorderFamily::zero: return 0.0;
      case DisorderFamily::gaussian: return param * rng.normal();
      case DisorderFamily::uniform_centered: return param * (2.0 * rng.uniform() - 1.0);
      case DisorderFamily::rademacher: return (rng() >> 63) ? param : -param;
      case DisorderFamily::shifted_exponential: return param * (-std::log(rng.uniform()) - 1.0);
    }
    throw std::invalid_argument("unknown disorder family");
  }

  friend bool operator==(const DisorderLaw&, const DisorderLaw&) = default;
};

/// Charges omega_1..omega_n; omega[0] holds omega_1. omega_0 is never used.
struct DisorderSample {
  std::uint64_t master_seed = 0;
  std::uint64_t sample_index = 0;
  std::vector<double> omega;

  int size() const { return static_cast<int>(omega.size()); }
  /// omega_a for 1 <= a <= n.
  double at(int a) const { return omega[static_cast<std::size_t>(a - 1)]; }

  static DisorderSample constant(int n, double value = 0.0) {
    DisorderSample s;
    s.omega.assign(static_cast<std::size_t>(n), value);
    return s;
  }
  static DisorderSample from(std::vector<double> omega) {
    DisorderSample s;
    s.omega = std::move(omega);
    return s;
  }
};

inline DisorderSample sample_disorder(const DisorderLaw& law, int n, std::uint64_t master_seed,
                                      std::uint64_t sample_index) {
  if (n < 1) throw std::invalid_argument("sample_disorder: n must be >= 1");
  DisorderSample s;
  s.master_seed = master_seed;
  s.sample_index = sample_index;
  s.omega.resize(static_cast<std::size_t>(n));
  CounterRng rng(master_seed, sample_index);
  for (auto& w : s.omega) w = law.draw(rng);
  return s;
}

}  // namespace pinlab
