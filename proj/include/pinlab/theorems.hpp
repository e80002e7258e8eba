#pragma once

// Runnable checks of the localized-phase results, one report per check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pinlab/disorder_mc.hpp"
#include "pinlab/model.hpp"
#include "pinlab/oracle.hpp"
#include "pinlab/parallel.hpp"
#include "pinlab/quenched_dp.hpp"
#include "pinlab/stats.hpp"

namespace pinlab {

enum class CheckId { C1 = 1, C2, C3, C4, C5, C6, C7, C8, C9, C10, C11, C12, C13 };

inline constexpr std::array<CheckId, 13> kAllChecks{CheckId::C1, CheckId::C2,  CheckId::C3,  CheckId::C4, CheckId::C5,
                                                    CheckId::C6, CheckId::C7,  CheckId::C8,  CheckId::C9, CheckId::C10,
                                                    CheckId::C11, CheckId::C12, CheckId::C13};

inline std::string to_string(CheckId id) { return "C" + std::to_string(static_cast<int>(id)); }

inline CheckId check_id_from_string(const std::string& s) {
  for (auto id : kAllChecks)
    if (to_string(id) == s) return id;
  throw std::invalid_argument("unknown check id '" + s + "'");
}

/// The result each check exercises.
inline std::string check_result(CheckId id) {
  switch (id) {
    case CheckId::C1: return "smoothness of the free energy with Gevrey-3 cumulant growth";
    case CheckId::C2: return "quenched central limit theorem for the contact number";
    case CheckId::C3: return "quenched concentration of the contact number and concentration of the free energy";
    case CheckId::C4: return "random centering: concentration, bounded offset from rho n, positive variance w, normal limit";
    case CheckId::C5: return "bounds min(f, f^2) <= mu <= f";
    case CheckId::C6: return "maximal excursion: M_n / log n converges to 1/mu";
    case CheckId::C7: return "exponential decay of two-replica avoidance and of correlations";
    case CheckId::C8: return "positive thermal variance and strict convexity";
    case CheckId::C9: return "contact-enforcement lower bound and exchange inequality";
    case CheckId::C10: return "conditional independence of consecutive stretches";
    case CheckId::C11: return "sqrt(n log n) bound on the centering offset";
    case CheckId::C12: return "linear growth of the centering cumulants";
    case CheckId::C13: return "small contact fraction is exponentially unlikely";
  }
  return "";
}

/// check id -> result exercised.
inline std::vector<std::pair<std::string, std::string>> check_mapping() {
  std::vector<std::pair<std::string, std::string>> out;
  for (auto id : kAllChecks) out.emplace_back(to_string(id), check_result(id));
  return out;
}

class check_config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CheckConfig {
  McConfig mc;
  /// Field used by single-h checks; mc.h_values is the grid for C5.
  double h = 3.0;
  /// Thresholds for the concentration fits; empty means 12 points up to
  /// 4.4 sqrt(n).
  std::vector<double> u_grid;
  int r_max = 6;
  int seeds = 5;
  int hl_seeds = 10;
  int inequality_samples = 20;
  int oracle_instances = 200;
  int oracle_n_max = 10;
  int contact_cap = kDefaultContactLawCap;
  DecayOptions decay;
  double ks_quenched_max = 0.06;
  double ks_centering_max = 0.05;
  double excursion_eps = 0.25;
  double excursion_mass = 0.9;
  double decay_r2_min = 0.98;
  double delta_fraction = 0.5;
  double factorization_tol = 1e-12;
};

enum class CheckStatus { passed, failed, skipped };

inline std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::passed: return "passed";
    case CheckStatus::failed: return "failed";
    case CheckStatus::skipped: return "skipped";
  }
  return "?";
}

struct FittedConstant {
  std::string name;
  double value = 0.0;
  double stderr = 0.0;
  friend bool operator==(const FittedConstant&, const FittedConstant&) = default;
};

/// One pass/fail condition; `applicable == false` clauses do not count.
struct Clause {
  std::string name;
  bool applicable = true;
  bool holds = false;
  std::string note;
  friend bool operator==(const Clause&, const Clause&) = default;
};

struct CheckReport {
  CheckId id = CheckId::C1;
  std::string result;
  CheckStatus status = CheckStatus::failed;
  std::string skip_reason;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<FittedConstant> fitted;
  std::vector<std::pair<std::string, double>> tolerances;
  std::vector<Clause> clauses;

  bool passed() const { return status == CheckStatus::passed; }
  double metric(const std::string& name) const {
    for (const auto& [k, v] : metrics)
      if (k == name) return v;
    throw std::out_of_range("CheckReport: no metric '" + name + "'");
  }
  const FittedConstant& constant(const std::string& name) const {
    for (const auto& c : fitted)
      if (c.name == name) return c;
    throw std::out_of_range("CheckReport: no fitted constant '" + name + "'");
  }
  const Clause& clause(const std::string& name) const {
    for (const auto& c : clauses)
      if (c.name == name) return c;
    throw std::out_of_range("CheckReport: no clause '" + name + "'");
  }
  friend bool operator==(const CheckReport&, const CheckReport&) = default;
};

namespace detail {

class ReportBuilder {
 public:
  ReportBuilder(CheckId id, const CheckConfig& cfg) {
    r_.id = id;
    r_.result = check_result(id);
    auto join = [](const auto& v) {
      std::ostringstream os;
      os.precision(17);
      for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
      return os.str();
    };
    std::ostringstream h;
    h.precision(17);
    h << cfg.h;
    r_.parameters = {{"disorder", std::string(to_string(cfg.mc.disorder.family)) + "(" + std::to_string(cfg.mc.disorder.param) + ")"},
                     {"h", h.str()},
                     {"h_values", join(cfg.mc.h_values)},
                     {"n_values", join(cfg.mc.n_values)},
                     {"samples", std::to_string(cfg.mc.samples)},
                     {"master_seed", std::to_string(cfg.mc.master_seed)}};
  }
  void param(const std::string& k, const std::string& v) { r_.parameters.emplace_back(k, v); }
  void metric(const std::string& k, double v) { r_.metrics.emplace_back(k, v); }
  void fit(const std::string& k, double v, double se) { r_.fitted.push_back({k, v, se}); }
  void tolerance(const std::string& k, double v) { r_.tolerances.emplace_back(k, v); }
  void clause(const std::string& name, bool holds, const std::string& note = {}) {
    r_.clauses.push_back({name, true, holds, note});
  }
  void not_applicable(const std::string& name, const std::string& note) { r_.clauses.push_back({name, false, false, note}); }
  CheckReport finish() {
    bool ok = true;
    for (const auto& c : r_.clauses)
      if (c.applicable && !c.holds) ok = false;
    r_.status = ok ? CheckStatus::passed : CheckStatus::failed;
    return r_;
  }

 private:
  CheckReport r_;
};

inline std::string tag(const char* base, int n) { return std::string(base) + ".n" + std::to_string(n); }

inline double std_of(const std::vector<double>& x) { return x.size() >= 2 ? std::sqrt(stats::variance(x)) : 0.0; }

/// Kolmogorov distance between the standardized exact contact-number law and
/// the normal law.
inline double quenched_ks(const ContactLaw& law) {
  const auto m = law.moments();
  const double sd = std::sqrt(m[2]);
  std::vector<double> x, w;
  for (int l = 0; l <= law.n; ++l) {
    const double p = law.pmf(l);
    if (p == 0.0) continue;
    x.push_back((l - m[1]) / sd);
    w.push_back(p);
  }
  return stats::ks_lattice(x, w);
}

inline McConfig with_samples(const McConfig& mc, int samples) {
  McConfig c = mc;
  c.samples = samples;
  return c;
}

// -- C1 ---------------------------------------------------------------------

inline CheckReport check_regularity(const CheckConfig& cfg) {
  ReportBuilder rb(CheckId::C1, cfg);
  const auto& ns = cfg.mc.n_values;
  const int R = cfg.r_max;
  if (static_cast<std::size_t>(R) > cfg.mc.jet_order) throw check_config_error("C1: r_max exceeds the jet order");
  const int seeds = std::min(cfg.seeds, cfg.mc.samples);
  // kap[s][k][r] = kappa_r / n at grid point k
  auto kap = parallel_map<std::vector<std::vector<double>>>(
      static_cast<std::size_t>(seeds), cfg.mc.workers, [&](std::size_t s) {
        const auto sys = log_partition(cfg.mc.law, cfg.h, cfg.mc.sample(static_cast<int>(s), ns.back()), ns.back(),
                                       QuenchedSystem::Tables::prefix_only);
        std::vector<std::vector<double>> out;
        std::size_t next = 0;
        jet_prefix_recursion(sys, cfg.mc.jet_order, [&](int k, const ScaledJet& j) {
          while (next < ns.size() && ns[next] == k) {
            const auto c = cumulants_from_jet(j, R);
            std::vector<double> row(static_cast<std::size_t>(R) + 1, 0.0);
            for (int r = 1; r <= R; ++r) row[r] = c[r] / k;
            out.push_back(row);
            ++next;
          }
        });
        return out;
      });
  rb.tolerance("trend_sigmas", 2.0);
  bool converging = true, spread_shrinks = true;
  for (int r = 1; r <= std::min(R, 4); ++r) {
    std::vector<double> mean_k, spread_k, se_k;
    for (std::size_t k = 0; k < ns.size(); ++k) {
      std::vector<double> v;
      for (int s = 0; s < seeds; ++s) v.push_back(kap[s][k][r]);
      mean_k.push_back(stats::mean(v));
      spread_k.push_back(std_of(v));
      se_k.push_back(std_of(v) / std::sqrt(static_cast<double>(seeds)));
      rb.metric("kappa" + std::to_string(r) + "_per_n.mean.n" + std::to_string(ns[k]), mean_k.back());
      rb.metric("kappa" + std::to_string(r) + "_per_n.spread.n" + std::to_string(ns[k]), spread_k.back());
    }
    for (std::size_t k = 2; k < ns.size(); ++k) {
      const double d_prev = std::abs(mean_k[k - 1] - mean_k[k - 2]);
      const double d_cur = std::abs(mean_k[k] - mean_k[k - 1]);
      const double sigma = std::sqrt(se_k[k] * se_k[k] + 2 * se_k[k - 1] * se_k[k - 1] + se_k[k - 2] * se_k[k - 2]);
      if (d_cur > d_prev + 2.0 * sigma) converging = false;
    }
    for (std::size_t k = 1; k < ns.size(); ++k) {
      const double sigma = seeds > 1 ? std::max(spread_k[k], spread_k[k - 1]) / std::sqrt(2.0 * (seeds - 1)) : 0.0;
      if (spread_k[k] > spread_k[k - 1] + 2.0 * sigma) spread_shrinks = false;
    }
  }
  double c_hat = 0.0;
  int r_star = 1;
  const std::size_t last = ns.size() - 1;
  for (int r = 1; r <= R; ++r) {
    std::vector<double> v;
    for (int s = 0; s < seeds; ++s) v.push_back(kap[s][last][r]);
    const double g = std::pow(std::abs(stats::mean(v)) / std::pow(factorial(r), 3), 1.0 / r);
    rb.metric("gevrey_ratio.r" + std::to_string(r), g);
    if (g > c_hat) {
      c_hat = g;
      r_star = r;
    }
  }
  {
    std::vector<double> v;
    for (int s = 0; s < seeds; ++s)
      v.push_back(std::pow(std::abs(kap[s][last][r_star]) / std::pow(factorial(r_star), 3), 1.0 / r_star));
    rb.fit("gevrey_c", c_hat, std_of(v) / std::sqrt(static_cast<double>(seeds)));
  }
  rb.clause("cumulant_increments_shrink", converging);
  rb.clause("seed_spread_shrinks", spread_shrinks);
  rb.clause("gevrey_constant_finite", std::isfinite(c_hat) && c_hat > 0.0);
  return rb.finish();
}

// -- C2 ---------------------------------------------------------------------

inline CheckReport check_quenched_clt(const CheckConfig& cfg) {
  ReportBuilder rb(CheckId::C2, cfg);
  const auto& ns = cfg.mc.n_values;
  if (ns.back() > cfg.contact_cap) throw check_config_error("C2: n exceeds the contact-law cap");
  const int seeds = std::min(cfg.seeds, cfg.mc.samples);
  auto ks = parallel_map<std::vector<double>>(static_cast<std::size_t>(seeds), cfg.mc.workers, [&](std::size_t s) {
    const auto omega = cfg.mc.sample(static_cast<int>(s), ns.back());
    std::vector<double> row;
    for (int n : ns)
      row.push_back(quenched_ks(
          contact_law(log_partition(cfg.mc.law, cfg.h, omega, n, QuenchedSystem::Tables::prefix_only), cfg.contact_cap)));
    return row;
  });
  rb.tolerance("ks_max_at_largest_n", cfg.ks_quenched_max);
  rb.tolerance("trend_sigmas", 2.0);
  std::vector<double> sigma;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    std::vector<double> v;
    for (int s = 0; s < seeds; ++s) {
      v.push_back(ks[s][k]);
      rb.metric("ks.seed" + std::to_string(s) + ".n" + std::to_string(ns[k]), ks[s][k]);
    }
    sigma.push_back(std_of(v));
    rb.metric(tag("ks.mean", ns[k]), stats::mean(v));
    rb.metric(tag("ks.sigma", ns[k]), sigma.back());
  }
  bool trend = true, endpoint = true;
  for (int s = 0; s < seeds; ++s) {
    for (std::size_t k = 1; k < ns.size(); ++k)
      if (ks[s][k] > ks[s][k - 1] + 2.0 * std::max(sigma[k], sigma[k - 1])) trend = false;
    if (!(ks[s].back() <= cfg.ks_quenched_max)) endpoint = false;
  }
  rb.clause("ks_nonincreasing", trend);
  rb.clause("ks_below_threshold", endpoint);
  return rb.finish();
}

// -- C3 ---------------------------------------------------------------------

inline CheckReport check_concentration(const CheckConfig& cfg) {
  ReportBuilder rb(CheckId::C3, cfg);
  const int n = cfg.mc.n_values.back();
  if (n > cfg.contact_cap) throw check_config_error("C3: n exceeds the contact-law cap");
  const auto u = cfg.u_grid.empty() ? default_u_grid(n) : cfg.u_grid;
  const int seeds = std::min(cfg.seeds, cfg.mc.samples);
  struct Q {
    double kappa_five_thirds, kappa_linear;
  };
  auto q = parallel_map<Q>(static_cast<std::size_t>(seeds), cfg.mc.workers, [&](std::size_t s) {
    const auto law = contact_law(log_partition(cfg.mc.law, cfg.h, cfg.mc.sample(static_cast<int>(s), n), n,
                                               QuenchedSystem::Tables::prefix_only),
                                 cfg.contact_cap);
    const double mean = law.mean();
    Q out{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    for (int k = 1; k <= n; ++k) {
      // exact P[|L - mean| >= k]
      double tail = 0.0;
      for (int l = 0; l <= n; ++l)
        if (std::abs(l - mean) >= k) tail += law.pmf(l);
      if (!(tail > 0.0)) continue;
      const double c = -std::log(tail / 2.0) / (double(k) * k);
      out.kappa_five_thirds = std::min(out.kappa_five_thirds, c * (n + std::pow(k, 5.0 / 3.0)));
      out.kappa_linear = std::min(out.kappa_linear, c * (n + k));
    }
    return out;
  });
  bool quenched_ok = true;
  std::vector<double> k53;
  for (int s = 0; s < seeds; ++s) {
    rb.metric("quenched_kappa_five_thirds.seed" + std::to_string(s), q[s].kappa_five_thirds);
    rb.metric("quenched_kappa_linear.seed" + std::to_string(s), q[s].kappa_linear);
    k53.push_back(q[s].kappa_five_thirds);
    if (!(q[s].kappa_five_thirds > 0.0)) quenched_ok = false;
  }
  rb.fit("kappa_omega_min", *std::min_element(k53.begin(), k53.end()), 0.0);
  rb.clause("quenched_bound_dominates", quenched_ok);
  if (cfg.mc.samples < 500) {
    rb.not_applicable("free_energy_bound_dominates", "needs samples >= 500");
    rb.not_applicable("centering_bound_dominates", "needs samples >= 500");
    return rb.finish();
  }
  const auto c = concentration_scan(cfg.mc, cfg.h, n, u);
  rb.tolerance("wilson_z", 1.96);
  for (std::size_t i = 0; i < u.size(); ++i) {
    rb.metric("u" + std::to_string(i), u[i]);
    rb.metric("free_energy.freq.u" + std::to_string(i), c.free_energy.frequency[i]);
    rb.metric("free_energy.upper.u" + std::to_string(i), c.free_energy.upper[i]);
    rb.metric("centering.freq.u" + std::to_string(i), c.centering.frequency[i]);
    rb.metric("centering.upper.u" + std::to_string(i), c.centering.upper[i]);
  }
  rb.fit("kappa_free_energy_linear", c.free_energy.kappa_linear, 0.0);
  rb.fit("kappa_free_energy_five_thirds", c.free_energy.kappa_five_thirds, 0.0);
  rb.fit("kappa_centering_linear", c.centering.kappa_linear, 0.0);
  rb.fit("kappa_centering_five_thirds", c.centering.kappa_five_thirds, 0.0);
  rb.clause("free_energy_bound_dominates", c.free_energy.kappa_linear > 0.0,
            c.free_energy.degenerate ? "degenerate: kappa unconstrained" : "");
  rb.clause("centering_bound_dominates", c.centering.kappa_five_thirds > 0.0,
            c.centering.degenerate ? "degenerate: kappa unconstrained" : "");
  return rb.finish();
}

// -- C4 ---------------------------------------------------------------------

inline CheckReport check_centering(const CheckConfig& cfg) {
  ReportBuilder rb(CheckId::C4, cfg);
  const auto& ns = cfg.mc.n_values;
  const int N = ns.back();
  const int S = cfg.mc.samples;
  std::vector<int> grid = ns;
  const bool doubled = 2 * N <= cfg.mc.law.n_max();
  if (doubled) grid.push_back(2 * N);
  if (!doubled && ns.size() < 2) throw check_config_error("C4: needs two n values or room for 2n");
  const auto cs = cumulant_samples(cfg.mc, cfg.h, grid);
  const std::size_t hi = grid.size() - 1, lo = grid.size() - 2;
  const double dn = grid[hi] - grid[lo];
  std::vector<double> rho_s;
  for (int s = 0; s < S; ++s) rho_s.push_back((cs.kappa1[hi][s] - cs.kappa1[lo][s]) / dn);
  const double rho = stats::mean(rho_s);
  const double rho_se = stats::stderr_of_mean(rho_s);
  rb.fit("rho", rho, rho_se);
  const bool pure = cfg.mc.disorder.is_pure();
  const auto last = summarize_centering(cfg.h, N, cs.kappa1[ns.size() - 1]);
  rb.metric("mean", last.mean);
  rb.metric("variance_per_n", last.variance_per_n);
  rb.fit("w", last.variance_per_n, last.variance_per_n_stderr);
  rb.tolerance("w_sigmas", 3.0);
  rb.tolerance("ks_max", cfg.ks_centering_max);
  rb.tolerance("offset_sigmas", 3.0);
  if (pure) {
    rb.not_applicable("w_positive", "not applicable (pure model)");
    rb.clause("w_zero_for_pure_model", last.variance_per_n == 0.0);
    rb.not_applicable("ks_below_threshold", "degenerate centering (pure model)");
  } else {
    rb.clause("w_positive", last.variance_per_n > 3.0 * last.variance_per_n_stderr);
    if (S < 100) {
      rb.not_applicable("ks_below_threshold", "needs samples >= 100");
    } else {
      rb.metric("ks", last.ks);
      rb.clause("ks_below_threshold", last.ks <= cfg.ks_centering_max);
    }
  }
  // offsets d(n) = E[kappa_1] - rho n
  std::vector<double> d;
  double c_hat = 0.0;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    const double m = stats::mean(cs.kappa1[k]);
    d.push_back(m - rho * ns[k]);
    c_hat = std::max(c_hat, std::abs(d.back()));
    rb.metric(tag("offset", ns[k]), d.back());
  }
  rb.fit("c", c_hat, 0.0);
  bool consistent = true;
  for (std::size_t i = 0; i < ns.size(); ++i)
    for (std::size_t j = i + 1; j < ns.size(); ++j) {
      std::vector<double> diff;
      for (int s = 0; s < S; ++s) diff.push_back(cs.kappa1[j][s] - cs.kappa1[i][s] - rho * (ns[j] - ns[i]));
      const double se = std::hypot(stats::stderr_of_mean(diff), rho_se * (ns[j] - ns[i]));
      const double slack = 1e-9 * ns[j];
      if (std::abs(d[j] - d[i]) > 3.0 * se + slack) consistent = false;
    }
  rb.clause("offset_bounded_by_constant", consistent);
  return rb.finish();
}

// -- C5 ---------------------------------------------------------------------

inline CheckReport check_mu_bounds(const CheckConfig& cfg) {
  ReportBuilder rb(CheckId::C5, cfg);
  if (cfg.mc.h_values.size() < 5) throw check_config_error("C5: the h grid needs at least 5 points");
  if (cfg.mc.n_values.size() < 3) throw check_config_error("C5: the n grid needs at least 3 points");
  rb.tolerance("upper_bound_sigmas", 2.0);
  bool upper_ok = true, localized = true, jensen = true;
  double c_hat = std::numeric_limits<double>::infinity(), c_se = 0.0;
  for (double h : cfg.mc.h_values) {
    const auto ps = partition_samples(cfg.mc, h, cfg.mc.n_values);
    const auto mu = mu_from(cfg.mc, h, ps);
    std::ostringstream hs;
    hs << h;
    const std::string key = ".h" + hs.str();
    for (std::size_t k = 0; k < mu.n.size(); ++k) {
      const double sigma = std::hypot(mu.mu_n_stderr[k], mu.f_n_stderr[k]);
      if (mu.mu_n[k] > mu.f_n[k] + 2.0 * sigma) upper_ok = false;
      const auto fe = free_energy_from(h, mu.n[k], ps.log_z[k]);
      if (!fe.jensen_holds) jensen = false;
      rb.metric("mu_n" + key + ".n" + std::to_string(mu.n[k]), mu.mu_n[k]);
      rb.metric("f_n" + key + ".n" + std::to_string(mu.n[k]), mu.f_n[k]);
    }
    const double sigma = std::hypot(mu.mu.stderr, mu.f.stderr);
    if (mu.mu.mean > mu.f.mean + 2.0 * sigma) upper_ok = false;
    if (!(mu.f.mean > 3.0 * mu.f.stderr)) localized = false;
    rb.fit("mu" + key, mu.mu.mean, mu.mu.stderr);
    rb.fit("mu_first_excursion" + key, mu.mu_t1.mean, mu.mu_t1.stderr);
    rb.fit("f" + key, mu.f.mean, mu.f.stderr);
    const double lower = std::min(mu.f.mean, mu.f.mean * mu.f.mean);
    const double ratio = mu.mu.mean / lower;
    if (ratio < c_hat) {
      c_hat = ratio;
      c_se = ratio * std::hypot(mu.mu.stderr / mu.mu.mean, (lower == mu.f.mean ? 1.0 : 2.0) * mu.f.stderr / mu.f.mean);
    }
  }
  rb.fit("c", c_hat, c_se);
  rb.clause("all_h_localized", localized);
  rb.clause("mu_below_f", upper_ok);
  rb.clause("mu_above_c_min_f_f2", c_hat > 0.0);
  rb.clause("quenched_below_annealed", jensen);
  return rb.finish();
}

// -- C6 ---------------------------------------------------------------------

inline CheckReport check_max_excursion(const CheckConfig& cfg) {
  ReportBuilder rb(CheckId::C6, cfg);
  const auto& ns = cfg.mc.n_values;
  if (ns.size() < 3) throw check_config_error("C6: the n grid needs at least 3 points");
  const auto mu = estimate_mu(cfg.mc, cfg.h);
  const double m_hat = mu.mu.mean;
  rb.fit("mu", m_hat, mu.mu.stderr);
  rb.tolerance("eps", cfg.excursion_eps);
  rb.tolerance("mass_min", cfg.excursion_mass);
  rb.tolerance("trend_sigmas", 2.0);
  const int N = ns.back();
  const int m_top = std::min(N, static_cast<int>(std::ceil(3.0 * std::log(N) / m_hat)) + 1);
  // cdf[s][m][k] = P[M_{n_k} <= m]
  auto cdf = parallel_map<std::vector<std::vector<double>>>(
      static_cast<std::size_t>(cfg.mc.samples), cfg.mc.workers, [&](std::size_t s) {
        const auto sys = log_partition(cfg.mc.law, cfg.h, cfg.mc.sample(static_cast<int>(s), N), N,
                                       QuenchedSystem::Tables::prefix_only);
        std::vector<std::vector<double>> out(static_cast<std::size_t>(m_top) + 1);
        for (int m = 1; m <= m_top; ++m) {
          const auto all = max_excursion_cdf_prefixes(sys, m);
          for (int n : ns) out[m].push_back(all[n]);
        }
        return out;
      });
  auto cdf_at = [&](int s, int m, std::size_t k) {
    if (m < 1) return 0.0;
    if (m > m_top) return 1.0;
    return cdf[s][m][k];
  };
  std::vector<double> mass, se;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    const double L = std::log(static_cast<double>(ns[k])) / m_hat;
    const double upper = (1.0 + cfg.excursion_eps) * L, lower = (1.0 - cfg.excursion_eps) * L;
    const int m_hi = static_cast<int>(std::ceil(upper)) - 1;  // largest integer < upper
    const int m_lo = static_cast<int>(std::floor(lower));      // largest integer <= lower
    std::vector<double> v;
    for (int s = 0; s < cfg.mc.samples; ++s) v.push_back(cdf_at(s, m_hi, k) - cdf_at(s, m_lo, k));
    mass.push_back(stats::mean(v));
    se.push_back(stats::stderr_of_mean(v));
    rb.metric(tag("mass", ns[k]), mass.back());
    rb.metric(tag("mass_stderr", ns[k]), se.back());
    for (int m = 1; m <= m_top; ++m) {
      double c = 0.0;
      for (int s = 0; s < cfg.mc.samples; ++s) c += cdf_at(s, m, k);
      std::ostringstream key;
      key.precision(6);
      key << "cdf.n" << ns[k] << ".x" << m / std::log(static_cast<double>(ns[k]));
      rb.metric(key.str(), c / cfg.mc.samples);
    }
  }
  bool increasing = true;
  for (std::size_t k = 1; k < ns.size(); ++k)
    if (mass[k] < mass[k - 1] - 2.0 * std::hypot(se[k], se[k - 1])) increasing = false;
  rb.clause("mass_above_threshold", mass.back() > cfg.excursion_mass);
  rb.clause("mass_increasing", increasing);
  return rb.finish();
}

// -- C7 ---------------------------------------------------------------------

inline CheckReport check_decay(const CheckConfig& cfg) {
  ReportBuilder rb(CheckId::C7, cfg);
  const auto d = correlation_decay_scan(cfg.mc, cfg.h, cfg.decay);
  rb.param("window", std::to_string(cfg.decay.window));
  rb.param("fit_range", std::to_string(cfg.decay.fit_lo) + ".." + std::to_string(cfg.decay.fit_hi));
  rb.tolerance("gamma_sigmas", 3.0);
  rb.tolerance("r2_min", cfg.decay_r2_min);
  for (std::size_t j = 1; j < d.log_mean_a.size(); ++j) rb.metric("log_mean_a.j" + std::to_string(j), d.log_mean_a[j]);
  for (std::size_t g = 0; g < d.mixing_proxy.size(); ++g)
    rb.metric("mixing.g" + std::to_string(static_cast<int>(d.mixing_gap[g])), d.mixing_proxy[g]);
  if (d.at_floor) {
    rb.clause("avoidance_decay", false, "all a_j at the numeric floor");
  } else {
    rb.metric("avoidance_r2", d.fit.r2);
    rb.fit("gamma", d.gamma_hat, d.gamma_stderr);
    rb.fit("G", d.G_hat, d.G_hat * d.fit.intercept_stderr);
    rb.clause("avoidance_decay", d.gamma_hat > 3.0 * d.gamma_stderr);
    rb.clause("avoidance_fit_quality", d.fit.r2 >= cfg.decay_r2_min);
  }
  if (d.mixing_fitted) {
    rb.metric("mixing_r2", d.mixing_fit.r2);
    rb.fit("gamma_mixing", d.mixing_gamma, d.mixing_gamma_stderr);
    rb.clause("mixing_decay", d.mixing_gamma > 3.0 * d.mixing_gamma_stderr);
  } else {
    rb.clause("mixing_decay", false, "fewer than 3 resolvable gaps");
  }
  return rb.finish();
}

// -- C8 ---------------------------------------------------------------------

inline CheckReport check_variance(const CheckConfig& cfg) {
  ReportBuilder rb(CheckId::C8, cfg);
  const auto cs = cumulant_samples(cfg.mc, cfg.h, cfg.mc.n_values);
  rb.tolerance("v_sigmas", 3.0);
  bool strictly_convex = true, positive = true;
  for (std::size_t k = 0; k < cs.n.size(); ++k) {
    std::vector<double> v;
    for (double k2 : cs.kappa2[k]) {
      v.push_back(k2 / cs.n[k]);
      if (!(k2 > 0.0)) strictly_convex = false;
    }
    const double m = stats::mean(v), se = stats::stderr_of_mean(v);
    rb.metric(tag("v", cs.n[k]), m);
    rb.metric(tag("v_stderr", cs.n[k]), se);
    if (!(m > 3.0 * se)) positive = false;
    if (k + 1 == cs.n.size()) rb.fit("v", m, se);
  }
  rb.clause("v_positive", positive);
  rb.clause("second_derivative_positive_every_sample", strictly_convex);
  return rb.finish();
}

// -- oracle instances for C9 / C10 -------------------------------------------

struct OracleInstance {
  double h;
  DisorderSample omega;
  int n;
  std::vector<double> phi_weights, psi_weights;
};

inline OracleInstance oracle_instance(const CheckConfig& cfg, int i) {
  const int n = 2 + i % (cfg.oracle_n_max - 1);
  CounterRng rng(cfg.mc.master_seed ^ 0x0A11CEULL, static_cast<std::uint64_t>(i));
  OracleInstance inst{cfg.h + (rng.uniform() - 0.5), cfg.mc.sample(1'000'000 + i, n), n, {}, {}};
  for (int a = 0; a <= n; ++a) {
    inst.phi_weights.push_back(rng.uniform());
    inst.psi_weights.push_back(rng.uniform());
  }
  return inst;
}

// -- C9 ---------------------------------------------------------------------

inline CheckReport check_contact_bound(const CheckConfig& cfg) {
  ReportBuilder rb(CheckId::C9, cfg);
  const int N = cfg.mc.n_values.back();
  const int S = std::min(cfg.inequality_samples, cfg.mc.samples);
  const double xi = cfg.mc.law.xi();
  auto violations = parallel_map<std::pair<int, double>>(static_cast<std::size_t>(S), cfg.mc.workers, [&](std::size_t s) {
    const auto sys = log_partition(cfg.mc.law, cfg.h, cfg.mc.sample(static_cast<int>(s), N), N);
    int bad = 0;
    double margin = std::numeric_limits<double>::infinity();
    for (int a = 1; a < N; ++a) {
      const double bound = 1.0 / (1.0 + xi * std::exp(-sys.field(a)) * std::min(std::pow(a, xi), std::pow(N - a, xi)));
      const double e = contact_probability(sys, a);
      margin = std::min(margin, e - bound);
      if (e < bound * (1.0 - 1e-12)) ++bad;
    }
    return std::make_pair(bad, margin);
  });
  int bad = 0;
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& [b, m] : violations) {
    bad += b;
    margin = std::min(margin, m);
  }
  rb.param("xi", std::to_string(xi));
  rb.metric("contact_bound_violations", bad);
  rb.metric("contact_bound_min_margin", margin);
  // exchange inequality on oracle instances
  if (cfg.mc.law.n_max() < cfg.oracle_n_max) throw check_config_error("C9: law horizon below the oracle size");
  auto ex = parallel_map<int>(static_cast<std::size_t>(cfg.oracle_instances), cfg.mc.workers, [&](std::size_t i) {
    const auto inst = oracle_instance(cfg, static_cast<int>(i));
    const auto set = oracle::enumerate_paths(cfg.mc.law, inst.h, inst.omega, inst.n);
    int count = 0;
    for (int a = 1; a < inst.n; ++a) {
      auto phi = [&](std::span<const int> x) {
        double v = inst.phi_weights[0];
        for (int b = 0; b < a; ++b) v += inst.phi_weights[b] * x[b];
        return v;
      };
      auto psi = [&](std::span<const int> x) {
        double v = inst.psi_weights[0];
        for (int b = a + 1; b <= inst.n; ++b) v += inst.psi_weights[b] * x[b];
        return v;
      };
      const double lhs = oracle::enumerate_expectation(set, [&](auto x) { return phi(x) * (1 - x[a]) * psi(x); });
      const double rhs = oracle::enumerate_expectation(set, [&](auto x) { return phi(x) * x[a] * psi(x); });
      const double factor = xi * std::exp(-inst.h - inst.omega.at(a)) * std::min(std::pow(a, xi), std::pow(inst.n - a, xi));
      if (lhs > factor * rhs * (1.0 + 1e-12)) ++count;
    }
    return count;
  });
  const int ex_bad = std::accumulate(ex.begin(), ex.end(), 0);
  rb.metric("exchange_violations", ex_bad);
  rb.metric("oracle_instances", cfg.oracle_instances);
  rb.clause("contact_bound_every_site", bad == 0);
  rb.clause("exchange_inequality", ex_bad == 0);
  return rb.finish();
}

// -- C10 --------------------------------------------------------------------

inline CheckReport check_factorization(const CheckConfig& cfg) {
  ReportBuilder rb(CheckId::C10, cfg);
  if (cfg.mc.law.n_max() < cfg.oracle_n_max) throw check_config_error("C10: law horizon below the oracle size");
  rb.tolerance("residual_max", cfg.factorization_tol);
  auto res = parallel_map<double>(static_cast<std::size_t>(cfg.oracle_instances), cfg.mc.workers, [&](std::size_t i) {
    const auto inst = oracle_instance(cfg, static_cast<int>(i));
    const auto set = oracle::enumerate_paths(cfg.mc.law, inst.h, inst.omega, inst.n);
    double worst = 0.0;
    for (int a = 0; a <= inst.n; ++a) {
      auto phi = [&](std::span<const int> x) {
        double v = inst.phi_weights[0];
        for (int b = 0; b <= a; ++b) v += inst.phi_weights[b] * x[b];
        return v;
      };
      auto psi = [&](std::span<const int> x) {
        double v = inst.psi_weights[0];
        for (int b = a; b <= inst.n; ++b) v += inst.psi_weights[b] * x[b];
        return v;
      };
      const double ea = oracle::enumerate_expectation(set, [&](auto x) { return 1.0 * x[a]; });
      const double both = oracle::enumerate_expectation(set, [&](auto x) { return phi(x) * psi(x) * x[a]; }) / ea;
      // the two stretches as systems of their own
      const auto left = oracle::enumerate_paths(cfg.mc.law, inst.h, inst.omega, a);
      std::vector<double> shifted(inst.omega.omega.begin() + a, inst.omega.omega.end());
      const auto right = oracle::enumerate_paths(cfg.mc.law, inst.h, DisorderSample::from(shifted), inst.n - a);
      const double el = oracle::enumerate_expectation(left, [&](auto x) {
        double v = inst.phi_weights[0];
        for (int b = 0; b <= a; ++b) v += inst.phi_weights[b] * x[b];
        return v;
      });
      const double er = oracle::enumerate_expectation(right, [&](auto x) {
        double v = inst.psi_weights[0];
        for (int b = a; b <= inst.n; ++b) v += inst.psi_weights[b] * x[b - a];
        return v;
      });
      worst = std::max(worst, std::abs(both - el * er) / std::max(1.0, std::abs(both)));
    }
    return worst;
  });
  const double worst = *std::max_element(res.begin(), res.end());
  rb.metric("max_residual", worst);
  rb.metric("oracle_instances", cfg.oracle_instances);
  rb.clause("factorization", worst <= cfg.factorization_tol);
  return rb.finish();
}

// -- C11 --------------------------------------------------------------------

inline CheckReport check_hardy_littlewood(const CheckConfig& cfg) {
  ReportBuilder rb(CheckId::C11, cfg);
  const auto& ns = cfg.mc.n_values;
  if (ns.size() < 3) throw check_config_error("C11: the n grid needs at least 3 points");
  const int N = ns.back();
  // rho from samples independent of the tested seeds
  const bool doubled = 2 * N <= cfg.mc.law.n_max();
  const std::vector<int> rho_grid = doubled ? std::vector<int>{N, 2 * N} : std::vector<int>{N / 2, N};
  const auto rc = cumulant_samples(with_samples(cfg.mc, std::max(cfg.mc.samples, 2)), cfg.h, rho_grid, 2'000'000);
  std::vector<double> rho_s;
  for (std::size_t s = 0; s < rc.kappa1[0].size(); ++s)
    rho_s.push_back((rc.kappa1[1][s] - rc.kappa1[0][s]) / (rho_grid[1] - rho_grid[0]));
  const double rho = stats::mean(rho_s);
  rb.fit("rho", rho, stats::stderr_of_mean(rho_s));
  auto ratios = parallel_map<std::vector<double>>(static_cast<std::size_t>(cfg.hl_seeds), cfg.mc.workers,
                                                  [&](std::size_t s) {
                                                    const auto sys = log_partition(cfg.mc.law, cfg.h,
                                                                                   cfg.mc.sample(static_cast<int>(s), N),
                                                                                   N, QuenchedSystem::Tables::prefix_only);
                                                    const auto k = prefix_cumulants(sys, 1);
                                                    std::vector<double> out;
                                                    double run = 0.0;
                                                    std::size_t next = 0;
                                                    for (int n = 2; n <= N; ++n) {
                                                      run = std::max(run, std::abs(k[n][1] - rho * n) /
                                                                              std::sqrt(n * std::log(n)));
                                                      while (next < ns.size() && ns[next] == n) {
                                                        out.push_back(run);
                                                        ++next;
                                                      }
                                                    }
                                                    return out;
                                                  });
  std::vector<double> logs;
  for (int n : ns) logs.push_back(std::log(static_cast<double>(n)));
  std::vector<double> slopes;
  double largest = 0.0;
  for (int s = 0; s < cfg.hl_seeds; ++s) {
    slopes.push_back(stats::linear_fit(logs, ratios[s]).slope);
    largest = std::max(largest, ratios[s].back());
    for (std::size_t k = 0; k < ns.size(); ++k)
      rb.metric("ratio.seed" + std::to_string(s) + ".n" + std::to_string(ns[k]), ratios[s][k]);
  }
  const double slope = stats::mean(slopes);
  const double sigma = cfg.hl_seeds > 1 ? stats::stderr_of_mean(slopes) : 0.0;
  rb.metric("max_ratio", largest);
  rb.fit("trend_slope", slope, sigma);
  rb.tolerance("trend_sigmas", 2.0);
  rb.clause("ratio_bounded", std::isfinite(largest));
  rb.clause("trend_nonpositive", slope <= 2.0 * sigma);
  return rb.finish();
}

// -- C12 --------------------------------------------------------------------

inline CheckReport check_centering_cumulants(const CheckConfig& cfg) {
  if (cfg.mc.disorder.is_pure()) throw check_config_error("pure model");
  ReportBuilder rb(CheckId::C12, cfg);
  const auto& ns = cfg.mc.n_values;
  if (ns.size() < 2) throw check_config_error("C12: the n grid needs at least 2 points");
  if (cfg.mc.samples < 4) throw check_config_error("C12: needs samples >= 4");
  const auto cs = cumulant_samples(cfg.mc, cfg.h, ns);
  std::vector<CenteringStats> st;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    st.push_back(summarize_centering(cfg.h, ns[k], cs.kappa1[k]));
    rb.metric(tag("k3_per_n", ns[k]), st.back().k3_per_n);
    rb.metric(tag("k3_per_n_stderr", ns[k]), st.back().k3_stderr);
    rb.metric(tag("k4_per_n", ns[k]), st.back().k4_per_n);
    rb.metric(tag("k4_per_n_stderr", ns[k]), st.back().k4_stderr);
  }
  rb.tolerance("growth_sigmas", 3.0);
  const auto& a = st.front();
  const auto& b = st.back();
  rb.fit("k3_per_n", b.k3_per_n, b.k3_stderr);
  rb.fit("k4_per_n", b.k4_per_n, b.k4_stderr);
  rb.clause("k3_no_growth", std::abs(b.k3_per_n) <= std::abs(a.k3_per_n) + 3.0 * std::hypot(a.k3_stderr, b.k3_stderr));
  rb.clause("k4_no_growth", std::abs(b.k4_per_n) <= std::abs(a.k4_per_n) + 3.0 * std::hypot(a.k4_stderr, b.k4_stderr));
  return rb.finish();
}

// -- C13 --------------------------------------------------------------------

inline CheckReport check_small_contact_fraction(const CheckConfig& cfg) {
  ReportBuilder rb(CheckId::C13, cfg);
  std::vector<int> ns;
  for (int n : cfg.mc.n_values)
    if (n <= std::min(cfg.contact_cap, 512)) ns.push_back(n);
  if (ns.size() < 3) throw check_config_error("C13: needs 3 n values <= 512");
  const int S = std::min(cfg.mc.samples, cfg.seeds * 4);
  const int N = ns.back();
  struct Row {
    double rho;
    std::vector<ContactLaw> laws;
  };
  auto rows = parallel_map<Row>(static_cast<std::size_t>(S), cfg.mc.workers, [&](std::size_t s) {
    const auto omega = cfg.mc.sample(static_cast<int>(s), N);
    Row r;
    for (int n : ns)
      r.laws.push_back(contact_law(log_partition(cfg.mc.law, cfg.h, omega, n, QuenchedSystem::Tables::prefix_only),
                                   cfg.contact_cap));
    r.rho = r.laws.back().mean() / N;
    return r;
  });
  std::vector<double> rhos;
  for (const auto& r : rows) rhos.push_back(r.rho);
  const double rho = stats::mean(rhos);
  const double delta = cfg.delta_fraction * rho;
  rb.fit("rho", rho, stats::stderr_of_mean(rhos));
  rb.metric("delta", delta);
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    std::vector<double> lq;
    for (const auto& r : rows) lq.push_back(r.laws[k].log_cdf_below(delta * ns[k]));
    const double v = stats::log_mean_exp(lq);
    rb.metric(tag("log_prob_below", ns[k]), v);
    if (std::isfinite(v)) {
      xs.push_back(ns[k]);
      ys.push_back(v);
    }
  }
  if (xs.size() < 3) {
    rb.clause("positive_rate", false, "fewer than 3 finite points");
    return rb.finish();
  }
  const auto fit = stats::linear_fit(xs, ys);
  rb.fit("rate", -fit.slope, fit.slope_stderr);
  rb.metric("fit_r2", fit.r2);
  rb.tolerance("rate_sigmas", 3.0);
  rb.clause("positive_rate", -fit.slope > 3.0 * fit.slope_stderr);
  return rb.finish();
}

}  // namespace detail

/// Runs one check. Statistical failures are reported, never thrown;
/// configurations the check cannot use raise check_config_error.
inline CheckReport run_check(CheckId id, const CheckConfig& cfg) {
  cfg.mc.validate();
  switch (id) {
    case CheckId::C1: return detail::check_regularity(cfg);
    case CheckId::C2: return detail::check_quenched_clt(cfg);
    case CheckId::C3: return detail::check_concentration(cfg);
    case CheckId::C4: return detail::check_centering(cfg);
    case CheckId::C5: return detail::check_mu_bounds(cfg);
    case CheckId::C6: return detail::check_max_excursion(cfg);
    case CheckId::C7: return detail::check_decay(cfg);
    case CheckId::C8: return detail::check_variance(cfg);
    case CheckId::C9: return detail::check_contact_bound(cfg);
    case CheckId::C10: return detail::check_factorization(cfg);
    case CheckId::C11: return detail::check_hardy_littlewood(cfg);
    case CheckId::C12: return detail::check_centering_cumulants(cfg);
    case CheckId::C13: return detail::check_small_contact_fraction(cfg);
  }
  throw std::invalid_argument("run_check: unknown id");
}

inline CheckReport skipped_report(CheckId id, const std::string& reason) {
  CheckReport r;
  r.id = id;
  r.result = check_result(id);
  r.status = CheckStatus::skipped;
  r.skip_reason = reason;
  return r;
}

/// Runs the selected checks in id order, recording inapplicable ones as
/// skipped with the reason.
inline std::vector<CheckReport> full_report(const CheckConfig& cfg, std::vector<CheckId> ids = {}) {
  if (ids.empty()) ids.assign(kAllChecks.begin(), kAllChecks.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<CheckReport> out;
  for (auto id : ids) {
    try {
      out.push_back(run_check(id, cfg));
    } catch (const check_config_error& e) {
      out.push_back(skipped_report(id, e.what()));
    }
  }
  return out;
}

}  // namespace pinlab
