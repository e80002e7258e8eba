#pragma once

// Brute-force ground truth for small systems.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pinlab/model.hpp"
#include "pinlab/numerics.hpp"

namespace pinlab::oracle {

inline constexpr int kMaxOracleSize = 16;

/// One renewal configuration pinned at n: bit a-1 of `interior` set iff a is
/// a contact, for 1 <= a <= n-1.
struct Path {
  std::uint32_t interior = 0;
  double log_weight = 0.0;
};

struct PathSet {
  int n = 0;
  std::vector<Path> paths;

  /// Contact indicators X_0..X_n of path i.
  std::vector<int> indicators(std::size_t i) const {
    std::vector<int> x(static_cast<std::size_t>(n) + 1, 0);
    x[0] = 1;
    if (n > 0) x[n] = 1;
    for (int a = 1; a < n; ++a) x[a] = (paths[i].interior >> (a - 1)) & 1U;
    return x;
  }
  double log_partition() const {
    std::vector<double> w;
    w.reserve(paths.size());
    for (const auto& p : paths) w.push_back(p.log_weight);
    return log_sum_exp(std::span<const double>(w));
  }
};

/// omega[a-1] = omega_a.
inline PathSet enumerate_paths(std::span<const double> log_p, double h, std::span<const double> omega, int n) {
  if (n < 0 || n > kMaxOracleSize) throw std::invalid_argument("oracle: n must lie in 0..16");
  if (static_cast<int>(log_p.size()) < n || static_cast<int>(omega.size()) < n)
    throw std::invalid_argument("oracle: tables shorter than n");
  PathSet set;
  set.n = n;
  if (n == 0) {
    set.paths.push_back({0, 0.0});
    return set;
  }
  const std::uint32_t count = 1U << (n - 1);
  set.paths.reserve(count);
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    double lw = 0.0;
    int last = 0;
    for (int a = 1; a <= n; ++a) {
      const bool contact = (a == n) || ((mask >> (a - 1)) & 1U);
      if (!contact) continue;
      lw += log_p[static_cast<std::size_t>(a - last - 1)] + h + omega[static_cast<std::size_t>(a - 1)];
      last = a;
    }
    set.paths.push_back({mask, lw});
  }
  return set;
}

inline PathSet enumerate_paths(const InterArrivalLaw& law, double h, const DisorderSample& omega, int n) {
  return enumerate_paths(law.log_p_table(), h, omega.omega, n);
}

inline double enumerate_partition(const InterArrivalLaw& law, double h, const DisorderSample& omega, int n) {
  return enumerate_paths(law, h, omega, n).log_partition();
}

/// Polymer expectation of functional(X_0..X_n).
inline double enumerate_expectation(const PathSet& set, const std::function<double(std::span<const int>)>& functional) {
  const double lz = set.log_partition();
  double s = 0.0;
  for (std::size_t i = 0; i < set.paths.size(); ++i) {
    const auto x = set.indicators(i);
    s += std::exp(set.paths[i].log_weight - lz) * functional(x);
  }
  return s;
}

inline double enumerate_expectation(const InterArrivalLaw& law, double h, const DisorderSample& omega, int n,
                                    const std::function<double(std::span<const int>)>& functional) {
  return enumerate_expectation(enumerate_paths(law, h, omega, n), functional);
}

/// Exact pmf of L_n by enumeration.
inline std::vector<double> enumerate_contact_pmf(const PathSet& set) {
  std::vector<double> pmf(static_cast<std::size_t>(set.n) + 1, 0.0);
  const double lz = set.log_partition();
  for (std::size_t i = 0; i < set.paths.size(); ++i) {
    const int l = std::popcount(set.paths[i].interior) + (set.n > 0 ? 1 : 0);
    pmf[l] += std::exp(set.paths[i].log_weight - lz);
  }
  return pmf;
}

/// E[X_a X_b] for 0 <= a, b <= n in one pass; the diagonal holds E[X_a].
inline std::vector<std::vector<double>> enumerate_pair_moments(const PathSet& set) {
  const std::size_t m = static_cast<std::size_t>(set.n) + 1;
  std::vector<std::vector<double>> out(m, std::vector<double>(m, 0.0));
  const double lz = set.log_partition();
  for (std::size_t i = 0; i < set.paths.size(); ++i) {
    const double w = std::exp(set.paths[i].log_weight - lz);
    const auto x = set.indicators(i);
    for (std::size_t a = 0; a < m; ++a) {
      if (!x[a]) continue;
      for (std::size_t b = 0; b < m; ++b)
        if (x[b]) out[a][b] += w;
    }
  }
  return out;
}

/// Law of the longest inter-arrival M_n: entry m is P[M_n = m].
inline std::vector<double> enumerate_max_excursion_pmf(const PathSet& set) {
  std::vector<double> pmf(static_cast<std::size_t>(set.n) + 1, 0.0);
  const double lz = set.log_partition();
  for (std::size_t i = 0; i < set.paths.size(); ++i) {
    const auto x = set.indicators(i);
    int last = 0, longest = 0;
    for (int a = 1; a <= set.n; ++a)
      if (x[a]) {
        longest = std::max(longest, a - last);
        last = a;
      }
    pmf[longest] += std::exp(set.paths[i].log_weight - lz);
  }
  return pmf;
}

/// E^{(x)2}[prod_{k=1}^{n-1}(1 - X_k X'_k)] by enumerating all pairs.
inline double enumerate_avoidance(const PathSet& set) {
  const double lz = set.log_partition();
  double s = 0.0;
  for (const auto& p : set.paths)
    for (const auto& q : set.paths)
      if ((p.interior & q.interior) == 0) s += std::exp(p.log_weight + q.log_weight - 2.0 * lz);
  return s;
}

/// P[M_n <= m] by enumeration.
inline double enumerate_max_excursion_cdf(const PathSet& set, int m) {
  return enumerate_expectation(set, [m](std::span<const int> x) {
    int last = 0;
    int longest = 0;
    for (std::size_t a = 1; a < x.size(); ++a)
      if (x[a]) {
        longest = std::max(longest, static_cast<int>(a) - last);
        last = static_cast<int>(a);
      }
    return longest <= m ? 1.0 : 0.0;
  });
}

// ---------------------------------------------------------------------------
// Pure model
// ---------------------------------------------------------------------------

/// log sum_{t>=1} p(t) z^t for z in (0, 1], using the tabulated values and
/// the closed form beyond the horizon.
inline double log_generating_function(const InterArrivalLaw& law, double log_z) {
  LogAccumulator acc;
  for (int t = 1; t <= law.n_max(); ++t) acc.add(law.log_p(t) + t * log_z);
  if (law.kind() == InterArrivalLaw::Kind::raw_table) return acc.log_value();
  if (log_z == 0.0) return log_add(acc.log_value(), std::log(law.tail_mass()));
  constexpr long kMaxTerms = 50'000'000;
  long t = law.n_max() + 1;
  for (; t < law.n_max() + kMaxTerms; ++t) {
    const double term = law.log_p_extended(static_cast<double>(t)) + t * log_z;
    acc.add(term);
    if (term < acc.log_value() - 46.0) break;
  }
  return acc.log_value();
}

/// Free energy of the pure model: -log z* where e^h G(z*) = 1, or 0 when no
/// root exists below 1.
inline double pure_model_free_energy(const InterArrivalLaw& law, double h) {
  auto excess = [&](double log_z) { return h + log_generating_function(law, log_z); };  // log F(z)
  if (excess(0.0) <= 0.0) return 0.0;
  double lo = -1.0;
  while (excess(lo) >= 0.0) {
    lo *= 2.0;
    if (lo < -1e6) throw numeric_domain_error("pure_model_free_energy: no bracket");
  }
  double hi = 0.0;
  for (int it = 0; it < 400 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  if (hi - lo > 1e-12) throw numeric_domain_error("pure_model_free_energy: bisection did not converge");
  return -0.5 * (lo + hi);
}

}  // namespace pinlab::oracle
