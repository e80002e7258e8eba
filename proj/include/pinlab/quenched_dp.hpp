#pragma once

// Exact quenched observables of the pinning model for one (n, h, omega).
//
// Conventions: sites are 0..n, X_0 = X_n = 1, and the Boltzmann factor
// e^{h+omega_a} is collected at every contact a >= 1. Z_{[i,j]} is the
// partition function of the segment i..j pinned at both ends, with charges
// omega_{i+1}..omega_j; Z_{0,k} = Z_{[0,k]}.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pinlab/model.hpp"
#include "pinlab/numerics.hpp"

namespace pinlab {

inline constexpr std::size_t kDefaultJetOrder = 8;
inline constexpr int kDefaultWindow = 128;
inline constexpr int kDefaultContactLawCap = 2048;

class QuenchedSystem {
 public:
  enum class Tables { prefix_only, prefix_and_suffix };

  QuenchedSystem(const InterArrivalLaw& law, double h, const DisorderSample& omega, int n,
                 Tables tables = Tables::prefix_and_suffix);

  int n() const { return n_; }
  double h() const { return h_; }
  double xi() const { return xi_; }
  double log_p(int t) const { return log_p_[static_cast<std::size_t>(t)]; }
  double omega(int a) const { return omega_[static_cast<std::size_t>(a)]; }
  /// h + omega_a.
  double field(int a) const { return field_[static_cast<std::size_t>(a)]; }

  /// log Z_{0,k}, k = 0..n.
  double log_z_prefix(int k) const { return prefix_[static_cast<std::size_t>(k)]; }
  /// log Z_{[a,n]}, a = 0..n. Requires the suffix table.
  double log_z_suffix(int a) const {
    if (suffix_.empty() && n_ > 0) throw std::logic_error("QuenchedSystem: suffix table not built");
    return suffix_[static_cast<std::size_t>(a)];
  }
  bool has_suffix() const { return !suffix_.empty() || n_ == 0; }

  double log_z() const { return prefix_.back(); }
  /// log Z^-: the terminal Boltzmann factor removed.
  double log_z_minus() const { return n_ == 0 ? 0.0 : log_z() - field(n_); }

  const std::vector<double>& prefix() const { return prefix_; }
  std::span<const double> log_p_table() const { return log_p_; }

 private:
  int n_ = 0;
  double h_ = 0.0;
  double xi_ = 0.0;
  std::vector<double> log_p_;   // index t = 0..n, entry 0 unused
  std::vector<double> omega_;   // index a = 0..n, entry 0 unused
  std::vector<double> field_;   // h + omega_a
  std::vector<double> prefix_;  // log Z_{0,k}
  std::vector<double> suffix_;  // log Z_{[a,n]}
};

namespace detail {

constexpr double kNegInfDp = -std::numeric_limits<double>::infinity();

/// log sum_{t=1..tmax} exp(row[k - t] + lp[t]), two-pass.
inline double lse_backward(const double* row, int k, const double* lp, int tmax) {
  double mx = kNegInfDp;
  for (int t = 1; t <= tmax; ++t) mx = std::max(mx, row[k - t] + lp[t]);
  if (mx == kNegInfDp) return mx;
  double s = 0.0;
  for (int t = 1; t <= tmax; ++t) s += std::exp(row[k - t] + lp[t] - mx);
  return mx + std::log(s);
}

/// Forward recursion on the segment starting at `start`, for lengths
/// 0..len: out[x] = log Z_{[start, start + x]}.
inline void window_forward(const QuenchedSystem& sys, int start, int len, double* out, int max_jump) {
  out[0] = 0.0;
  const double* lp = sys.log_p_table().data();
  for (int x = 1; x <= len; ++x) out[x] = sys.field(start + x) + lse_backward(out, x, lp, std::min(x, max_jump));
}

}  // namespace detail

inline QuenchedSystem::QuenchedSystem(const InterArrivalLaw& law, double h, const DisorderSample& omega, int n,
                                      Tables tables)
    : n_(n), h_(h), xi_(law.xi()) {
  if (n < 0) throw std::invalid_argument("log_partition: n must be >= 0");
  if (n > law.n_max())
    throw std::out_of_range("log_partition: n = " + std::to_string(n) + " exceeds the law's tabulation horizon " +
                            std::to_string(law.n_max()));
  if (omega.size() < n) throw std::invalid_argument("log_partition: disorder sample shorter than n");
  log_p_.assign(static_cast<std::size_t>(n) + 1, detail::kNegInfDp);
  omega_.assign(static_cast<std::size_t>(n) + 1, 0.0);
  field_.assign(static_cast<std::size_t>(n) + 1, h);
  for (int t = 1; t <= n; ++t) log_p_[t] = law.log_p(t);
  for (int a = 1; a <= n; ++a) {
    omega_[a] = omega.at(a);
    field_[a] = h + omega_[a];
  }
  prefix_.resize(static_cast<std::size_t>(n) + 1);
  detail::window_forward(*this, 0, n, prefix_.data(), n);
  if (tables == Tables::prefix_and_suffix && n > 0) {
    suffix_.assign(static_cast<std::size_t>(n) + 1, detail::kNegInfDp);
    suffix_[n] = 0.0;
    for (int a = n - 1; a >= 0; --a) {
      double mx = detail::kNegInfDp;
      for (int t = 1; t <= n - a; ++t) mx = std::max(mx, log_p_[t] + field_[a + t] + suffix_[a + t]);
      double s = 0.0;
      for (int t = 1; t <= n - a; ++t) s += std::exp(log_p_[t] + field_[a + t] + suffix_[a + t] - mx);
      suffix_[a] = mx + std::log(s);
    }
  }
}

/// Builds the prefix (and suffix) log-partition tables of one system.
inline QuenchedSystem log_partition(const InterArrivalLaw& law, double h, const DisorderSample& omega, int n,
                                    QuenchedSystem::Tables tables = QuenchedSystem::Tables::prefix_and_suffix) {
  return QuenchedSystem(law, h, omega, n, tables);
}

/// log Z_{[i,j]} by a forward recursion on the segment, O((j-i)^2).
inline double segment_log_partition(const QuenchedSystem& sys, int i, int j) {
  if (i < 0 || j > sys.n() || i > j) throw std::out_of_range("segment_log_partition: bad segment");
  if (i == 0) return sys.log_z_prefix(j);
  std::vector<double> w(static_cast<std::size_t>(j - i) + 1);
  detail::window_forward(sys, i, j - i, w.data(), j - i);
  return w.back();
}

// ---------------------------------------------------------------------------
// Segment table
// ---------------------------------------------------------------------------

/// log Z_{[i,j]} for 0 <= i < j <= n with j - i <= window.
class SegmentTable {
 public:
  SegmentTable() = default;
  SegmentTable(const QuenchedSystem& sys, int window) : n_(sys.n()), window_(window) {
    if (window < 1 || window > std::max(1, sys.n()))
      throw std::invalid_argument("segment_partitions: window must lie in 1..n");
    rows_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(window_ + 1), detail::kNegInfDp);
    for (int i = 0; i < n_; ++i) {
      const int len = std::min(window_, n_ - i);
      detail::window_forward(sys, i, len, row_ptr(i), len);
    }
  }

  int window() const { return window_; }
  int n() const { return n_; }
  /// log Z_{[i,j]}; j == i gives 0.
  double log_z(int i, int j) const {
    if (j == i) return 0.0;
    if (i < 0 || j > n_ || j < i || j - i > window_) throw std::out_of_range("SegmentTable: segment outside window");
    return rows_[static_cast<std::size_t>(i) * static_cast<std::size_t>(window_ + 1) + static_cast<std::size_t>(j - i)];
  }
  /// Row i: entries x = 0..min(window, n - i) hold log Z_{[i, i+x]}.
  std::span<const double> row(int i) const {
    return {rows_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(window_ + 1),
            static_cast<std::size_t>(std::min(window_, n_ - i)) + 1};
  }

 private:
  double* row_ptr(int i) {
    return rows_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(window_ + 1);
  }
  int n_ = 0;
  int window_ = 0;
  std::vector<double> rows_;
};

inline SegmentTable segment_partitions(const QuenchedSystem& sys, int window) { return SegmentTable(sys, window); }

// ---------------------------------------------------------------------------
// Contact probabilities, covariances, joint moments
// ---------------------------------------------------------------------------

/// E_{n,h,omega}[X_a].
inline double contact_probability(const QuenchedSystem& sys, int a) {
  if (a < 0 || a > sys.n()) throw std::out_of_range("contact_probability: site out of range");
  if (a == 0 || a == sys.n()) return 1.0;
  return std::exp(sys.log_z_prefix(a) + sys.log_z_suffix(a) - sys.log_z());
}

/// All E[X_a], a = 0..n.
inline std::vector<double> contact_profile(const QuenchedSystem& sys) {
  std::vector<double> out(static_cast<std::size_t>(sys.n()) + 1);
  for (int a = 0; a <= sys.n(); ++a) out[a] = contact_probability(sys, a);
  return out;
}

namespace detail {
template <class SegFn>
double log_joint_moment(const QuenchedSystem& sys, std::span<const int> sorted_sites, SegFn&& seg) {
  // E[prod X_{b_k}] for distinct increasing b_k, by the renewal factorization.
  if (sorted_sites.empty()) return 0.0;
  double acc = sys.log_z_prefix(sorted_sites.front());
  for (std::size_t k = 1; k < sorted_sites.size(); ++k) acc += seg(sorted_sites[k - 1], sorted_sites[k]);
  return acc + sys.log_z_suffix(sorted_sites.back()) - sys.log_z();
}
}  // namespace detail

/// E[prod_k X_{sites_k}] for any multiset of sites in 0..n.
inline double joint_contact_moment(const QuenchedSystem& sys, std::vector<int> sites,
                                   const SegmentTable* table = nullptr) {
  for (int a : sites)
    if (a < 0 || a > sys.n()) throw std::out_of_range("joint_contact_moment: site out of range");
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  auto seg = [&](int i, int j) {
    if (table && j - i <= table->window()) return table->log_z(i, j);
    return segment_log_partition(sys, i, j);
  };
  return std::exp(detail::log_joint_moment(sys, sites, seg));
}

/// cov[X_a, X_b] for 0 <= a <= b <= n.
inline double contact_covariance(const QuenchedSystem& sys, int a, int b, const SegmentTable* table = nullptr) {
  if (a > b) throw std::invalid_argument("contact_covariance: requires a <= b");
  if (a < 0 || b > sys.n()) throw std::out_of_range("contact_covariance: site out of range");
  const double ea = contact_probability(sys, a);
  if (a == b) return ea * (1.0 - ea);
  const double eb = contact_probability(sys, b);
  return joint_contact_moment(sys, {a, b}, table) - ea * eb;
}

// ---------------------------------------------------------------------------
// Law of the contact number
// ---------------------------------------------------------------------------

struct ContactLaw {
  int n = 0;
  /// log P[L_n = l], l = 0..n (entry 0 is -inf unless n == 0).
  std::vector<double> log_pmf;

  double pmf(int l) const { return std::exp(log_pmf[static_cast<std::size_t>(l)]); }
  double total() const {
    double s = 0.0;
    for (double v : log_pmf) s += std::exp(v);
    return s;
  }
  double mean() const {
    double s = 0.0;
    for (int l = 0; l <= n; ++l) s += l * pmf(l);
    return s;
  }
  /// Central moments 2..4 and raw mean.
  std::array<double, 5> moments() const {
    std::array<double, 5> m{};
    m[1] = mean();
    for (int l = 0; l <= n; ++l) {
      const double p = pmf(l);
      const double d = l - m[1];
      m[2] += p * d * d;
      m[3] += p * d * d * d;
      m[4] += p * d * d * d * d;
    }
    return m;
  }
  /// log P[L_n < x].
  double log_cdf_below(double x) const {
    LogAccumulator acc;
    for (int l = 0; l <= n && l < x; ++l) acc.add(log_pmf[l]);
    return acc.log_value();
  }
};

/// Exact pmf of L_n, by the count-indexed dynamic program in log domain.
inline ContactLaw contact_law(const QuenchedSystem& sys, int cap = kDefaultContactLawCap) {
  const int n = sys.n();
  if (n > cap)
    throw std::invalid_argument("contact_law: n = " + std::to_string(n) + " exceeds the cap " + std::to_string(cap));
  ContactLaw law;
  law.n = n;
  law.log_pmf.assign(static_cast<std::size_t>(n) + 1, detail::kNegInfDp);
  if (n == 0) {
    law.log_pmf[0] = 0.0;
    return law;
  }
  const double* lp = sys.log_p_table().data();
  // prev[k]: log weight of paths with l-1 contacts pinned at k.
  std::vector<double> prev(static_cast<std::size_t>(n) + 1, detail::kNegInfDp);
  std::vector<double> cur(static_cast<std::size_t>(n) + 1, detail::kNegInfDp);
  prev[0] = 0.0;
  const double logz = sys.log_z();
  for (int l = 1; l <= n; ++l) {
    std::fill(cur.begin(), cur.end(), detail::kNegInfDp);
    for (int k = l; k <= n; ++k) {
      // prev[k - t] is -inf for k - t < l - 1
      const int tmax = k - l + 1;
      const double v = detail::lse_backward(prev.data(), k, lp, tmax);
      cur[k] = v == detail::kNegInfDp ? v : v + sys.field(k);
    }
    law.log_pmf[l] = cur[n] - logz;
    std::swap(prev, cur);
  }
  return law;
}

// ---------------------------------------------------------------------------
// Cumulants of L_n through jets
// ---------------------------------------------------------------------------

struct CumulantVector {
  int r_max = 0;
  double log_z = 0.0;
  /// kappa[k] = d^k/dh^k log Z_{n,h}(omega), k = 1..r_max; kappa[0] unused.
  std::vector<double> kappa;

  double operator[](int k) const { return kappa[static_cast<std::size_t>(k)]; }
};

/// Runs the prefix recursion in jet arithmetic and calls visit(k, jet) for
/// k = 0..n. Jets are kept centered (coeffs[1] == 0, mean in the tilt).
template <class Visit>
void jet_prefix_recursion(const QuenchedSystem& sys, std::size_t order, Visit&& visit) {
  const int n = sys.n();
  const std::size_t m = order + 1;
  std::vector<double> scale(static_cast<std::size_t>(n) + 1), tilt(static_cast<std::size_t>(n) + 1);
  std::vector<double> coeffs((static_cast<std::size_t>(n) + 1) * m, 0.0);
  scale[0] = 0.0;
  tilt[0] = 0.0;
  coeffs[0] = 1.0;
  {
    ScaledJet j0(order);
    visit(0, j0);
  }
  std::vector<double> logw(static_cast<std::size_t>(n) + 1);
  std::vector<double> acc(m), shifted(m);
  for (int k = 1; k <= n; ++k) {
    double mx = detail::kNegInfDp;
    for (int t = 1; t <= k; ++t) {
      logw[t] = scale[k - t] + sys.log_p(t);
      mx = std::max(mx, logw[t]);
    }
    const double ref_tilt = tilt[k - 1];
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int t = 1; t <= k; ++t) {
      const double w = std::exp(logw[t] - mx);
      if (w == 0.0) continue;
      const double* c = coeffs.data() + static_cast<std::size_t>(k - t) * m;
      detail::multiply_by_exponential({c, m}, tilt[k - t] - ref_tilt, shifted);
      for (std::size_t i = 0; i < m; ++i) acc[i] += w * shifted[i];
    }
    ScaledJet j(order);
    j.coeffs = acc;
    j.scale = mx;
    j.tilt = ref_tilt;
    normalize(j);
    // Boltzmann factor e^{h + omega_k + dh}
    j.scale += sys.field(k);
    j.tilt += 1.0;
    recenter(j);
    scale[k] = j.scale;
    tilt[k] = j.tilt;
    std::copy(j.coeffs.begin(), j.coeffs.end(), coeffs.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(k) * m));
    visit(k, j);
  }
}

inline CumulantVector cumulants_from_jet(const ScaledJet& j, int r_max) {
  const auto l = log_of_jet(j);
  CumulantVector out;
  out.r_max = r_max;
  out.log_z = l[0];
  out.kappa.assign(static_cast<std::size_t>(r_max) + 1, 0.0);
  for (int k = 1; k <= r_max; ++k) out.kappa[k] = factorial(k) * l[static_cast<std::size_t>(k)];
  return out;
}

/// kappa_k = d^k/dh^k log Z_{n,h}(omega) for k = 1..r_max.
inline CumulantVector cumulants(const QuenchedSystem& sys, int r_max, std::size_t jet_order = kDefaultJetOrder) {
  if (r_max < 1) throw std::invalid_argument("cumulants: r_max must be >= 1");
  if (static_cast<std::size_t>(r_max) > jet_order)
    throw std::invalid_argument("cumulants: r_max = " + std::to_string(r_max) + " exceeds jet order " +
                                std::to_string(jet_order));
  ScaledJet last(jet_order);
  jet_prefix_recursion(sys, jet_order, [&](int k, const ScaledJet& j) {
    if (k == sys.n()) last = j;
  });
  return cumulants_from_jet(last, r_max);
}

/// Cumulants of L_k for every prefix length k = 0..n in one pass.
inline std::vector<CumulantVector> prefix_cumulants(const QuenchedSystem& sys, int r_max) {
  std::vector<CumulantVector> out(static_cast<std::size_t>(sys.n()) + 1);
  jet_prefix_recursion(sys, static_cast<std::size_t>(std::max(r_max, 1)),
                       [&](int k, const ScaledJet& j) { out[k] = cumulants_from_jet(j, r_max); });
  return out;
}

// ---------------------------------------------------------------------------
// Two-replica avoidance
// ---------------------------------------------------------------------------

struct AvoidanceResult {
  /// a[j] for j = 1..J; a[0] unused.
  std::vector<double> a;
  /// Largest clamp correction applied (recursive route only).
  double max_clamp = 0.0;
  bool clamp_warning = false;
};

namespace detail {
/// r(x, z) = P_{[s, s+z]}[last jump from x] for 0 <= x < z <= len.
inline std::vector<double> last_jump_ratios(const QuenchedSystem& sys, std::span<const double> w, int start, int len) {
  std::vector<double> r(static_cast<std::size_t>(len + 1) * static_cast<std::size_t>(len + 1), 0.0);
  for (int z = 1; z <= len; ++z) {
    const double base = sys.field(start + z) - w[z];
    for (int x = 0; x < z; ++x)
      r[static_cast<std::size_t>(x) * static_cast<std::size_t>(len + 1) + z] = std::exp(sys.log_p(z - x) + w[x] + base);
  }
  return r;
}
}  // namespace detail

/// a_j = E^{(x)2}_{[s, s+j]}[prod_{k=1}^{j-1}(1 - X_k X'_k)] for j = 1..J.
///
/// Computed by a pair dynamic program over the merged contact sequences of
/// the two replicas. Every term is positive, so values far below machine
/// epsilon keep full relative accuracy.
inline AvoidanceResult two_replica_avoidance(const QuenchedSystem& sys, const SegmentTable& table, int J,
                                             int start = 0) {
  if (J > table.window()) throw std::invalid_argument("two_replica_avoidance: window too small");
  if (start < 0 || start + J > sys.n()) throw std::out_of_range("two_replica_avoidance: window outside system");
  const auto w = table.row(start);
  const auto r = detail::last_jump_ratios(sys, w, start, J);
  const std::size_t stride = static_cast<std::size_t>(J + 1);
  auto R = [&](int x, int z) { return r[static_cast<std::size_t>(x) * stride + static_cast<std::size_t>(z)]; };
  // g[x * stride + y], x < y: normalized weight of partial pairs whose
  // last contacts are x (lagging) and y (leading).
  std::vector<double> g(stride * stride, 0.0);
  for (int z = 1; z < J; ++z) g[z] = 2.0 * R(0, z);
  for (int y = 1; y < J; ++y) {
    for (int x = 0; x < y; ++x) {
      const double gxy = g[static_cast<std::size_t>(x) * stride + y];
      if (gxy == 0.0) continue;
      double* row_x = g.data() + static_cast<std::size_t>(x) * stride;
      double* row_y = g.data() + static_cast<std::size_t>(y) * stride;
      const double* ry = r.data() + static_cast<std::size_t>(y) * stride;
      const double* rx = r.data() + static_cast<std::size_t>(x) * stride;
      for (int z = y + 1; z < J; ++z) {
        row_x[z] += gxy * ry[z];
        row_y[z] += gxy * rx[z];
      }
    }
  }
  AvoidanceResult out;
  out.a.assign(static_cast<std::size_t>(J) + 1, 0.0);
  for (int j = 1; j <= J; ++j) {
    double s = R(0, j) * R(0, j);
    for (int y = 1; y < j; ++y) {
      const double ryj = R(y, j);
      for (int x = 0; x < y; ++x) s += g[static_cast<std::size_t>(x) * stride + y] * R(x, j) * ryj;
    }
    out.a[j] = j == 1 ? 1.0 : s;
  }
  return out;
}

/// Convenience overload building a window table from the system.
inline AvoidanceResult two_replica_avoidance(const QuenchedSystem& sys, int J) {
  return two_replica_avoidance(sys, SegmentTable(sys, J), J, 0);
}

/// The renewal-of-first-common-contact recursion
///   a_j = 1 - sum_{i<j} a_i (Z_{[s,s+i]} Z_{[s+i,s+j]} / Z_{[s,s+j]})^2,
/// evaluated in linear scale. Loses relative accuracy once a_j approaches
/// machine epsilon; used as an independent route where values are O(1).
inline AvoidanceResult two_replica_avoidance_recursive(const QuenchedSystem& sys, const SegmentTable& table, int J,
                                                       int start = 0) {
  if (J > table.window()) throw std::invalid_argument("two_replica_avoidance: window too small");
  if (start < 0 || start + J > sys.n()) throw std::out_of_range("two_replica_avoidance: window outside system");
  AvoidanceResult out;
  out.a.assign(static_cast<std::size_t>(J) + 1, 0.0);
  for (int j = 1; j <= J; ++j) {
    double s = 1.0;
    const double lzj = table.log_z(start, start + j);
    for (int i = 1; i < j; ++i) {
      const double e = table.log_z(start, start + i) + table.log_z(start + i, start + j) - lzj;
      s -= out.a[i] * std::exp(2.0 * std::min(e, 0.0));
    }
    const double clamped = std::clamp(s, 0.0, 1.0);
    const double dev = std::abs(clamped - s);
    out.max_clamp = std::max(out.max_clamp, dev);
    if (dev > 1e-9) out.clamp_warning = true;
    out.a[j] = clamped;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Maximal excursion
// ---------------------------------------------------------------------------

/// P[M_n <= m], M_n the longest inter-arrival of the pinned path.
inline double max_excursion_cdf(const QuenchedSystem& sys, int m) {
  const int n = sys.n();
  if (m < 1) throw std::out_of_range("max_excursion_cdf: m must be >= 1");
  if (n == 0 || m >= n) return 1.0;
  std::vector<double> w(static_cast<std::size_t>(n) + 1);
  detail::window_forward(sys, 0, n, w.data(), m);
  return std::min(1.0, std::exp(w[n] - sys.log_z()));
}

/// P[M_k <= m] for every prefix system k = 0..n, in one restricted pass.
inline std::vector<double> max_excursion_cdf_prefixes(const QuenchedSystem& sys, int m) {
  if (m < 1) throw std::out_of_range("max_excursion_cdf: m must be >= 1");
  const int n = sys.n();
  std::vector<double> w(static_cast<std::size_t>(n) + 1);
  detail::window_forward(sys, 0, n, w.data(), m);
  std::vector<double> out(static_cast<std::size_t>(n) + 1, 1.0);
  for (int k = m + 1; k <= n; ++k) out[k] = std::min(1.0, std::exp(w[k] - sys.log_z_prefix(k)));
  return out;
}

/// P[M_n <= m] for m = 1..m_max (entry 0 unused), cost O(n m_max^2).
inline std::vector<double> max_excursion_cdf_table(const QuenchedSystem& sys, int m_max) {
  std::vector<double> out(static_cast<std::size_t>(m_max) + 1, 0.0);
  for (int m = 1; m <= m_max; ++m) out[m] = max_excursion_cdf(sys, m);
  return out;
}

// ---------------------------------------------------------------------------
// Ursell functions
// ---------------------------------------------------------------------------

namespace detail {
/// All set partitions of {0..r-1} as block-label vectors.
inline void set_partitions(int r, std::vector<std::vector<int>>& out) {
  std::vector<int> labels(static_cast<std::size_t>(r), 0);
  std::function<void(int, int)> rec = [&](int i, int blocks) {
    if (i == r) {
      out.push_back(labels);
      return;
    }
    for (int b = 0; b <= blocks; ++b) {
      labels[i] = b;
      rec(i + 1, std::max(blocks, b + 1));
    }
  };
  rec(0, 0);
}
}  // namespace detail

/// Joint cumulant of X_{a_1}, ..., X_{a_r}, r <= 4.
inline double ursell(const QuenchedSystem& sys, std::span<const int> sites, const SegmentTable* table = nullptr) {
  const int r = static_cast<int>(sites.size());
  if (r < 1 || r > 4) throw std::invalid_argument("ursell: order must lie in 1..4");
  for (int a : sites)
    if (a < 0 || a > sys.n()) throw std::out_of_range("ursell: site out of range");
  std::vector<std::vector<int>> parts;
  detail::set_partitions(r, parts);
  double total = 0.0;
  for (const auto& labels : parts) {
    const int nb = *std::max_element(labels.begin(), labels.end()) + 1;
    double prod = 1.0;
    for (int b = 0; b < nb; ++b) {
      std::vector<int> block;
      for (int i = 0; i < r; ++i)
        if (labels[i] == b) block.push_back(sites[i]);
      prod *= joint_contact_moment(sys, block, table);
    }
    const double sign = (nb % 2 == 1) ? 1.0 : -1.0;
    total += sign * factorial(nb - 1) * prod;
  }
  return total;
}

}  // namespace pinlab
