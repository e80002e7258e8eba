#pragma once

// Monte Carlo over disorder realizations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "pinlab/model.hpp"
#include "pinlab/parallel.hpp"
#include "pinlab/quenched_dp.hpp"
#include "pinlab/stats.hpp"

namespace pinlab {

struct McConfig {
  InterArrivalLaw law;
  DisorderLaw disorder;
  std::vector<double> h_values{3.0};
  std::vector<int> n_values{128, 256, 512};
  int samples = 100;
  std::uint64_t master_seed = 1;
  std::size_t jet_order = kDefaultJetOrder;
  int window = kDefaultWindow;
  int workers = 1;

  void validate() const {
    if (samples < 2) throw std::invalid_argument("McConfig: samples must be >= 2");
    if (h_values.empty() || n_values.empty()) throw std::invalid_argument("McConfig: grids must be nonempty");
    if (!std::is_sorted(h_values.begin(), h_values.end()) || !std::is_sorted(n_values.begin(), n_values.end()))
      throw std::invalid_argument("McConfig: grids must be sorted");
    if (n_values.front() < 1) throw std::invalid_argument("McConfig: n values must be positive");
    if (n_values.back() > law.n_max())
      throw std::out_of_range("McConfig: n = " + std::to_string(n_values.back()) + " exceeds the law's horizon " +
                              std::to_string(law.n_max()));
  }
  int n_max() const { return n_values.back(); }
  DisorderSample sample(int index, int n) const { return sample_disorder(disorder, n, master_seed, index); }
};

enum class Quantity {
  f,
  mu,
  rho,
  v,
  w,
  centering_mean,
  ks_centering,
  ks_quenched,
  decay_gamma,
  decay_G,
  conc_kappa
};

inline std::string to_string(Quantity q) {
  switch (q) {
    case Quantity::f: return "f";
    case Quantity::mu: return "mu";
    case Quantity::rho: return "rho";
    case Quantity::v: return "v";
    case Quantity::w: return "w";
    case Quantity::centering_mean: return "centering_mean";
    case Quantity::ks_centering: return "ks_centering";
    case Quantity::ks_quenched: return "ks_quenched";
    case Quantity::decay_gamma: return "decay_gamma";
    case Quantity::decay_G: return "decay_G";
    case Quantity::conc_kappa: return "conc_kappa";
  }
  return "?";
}

struct EstimateSeries {
  Quantity quantity = Quantity::f;
  double h = 0.0;
  int n = 0;
  double mean = 0.0;
  double stderr = 0.0;
  int sample_count = 0;
};

namespace detail {

/// Grouped jackknife over sample indices for a statistic of a subset of
/// samples.
template <class Stat>
double jackknife_over_samples(int samples, Stat&& stat, int groups = 20) {
  groups = std::min(groups, samples);
  std::vector<double> loo;
  std::vector<int> keep;
  for (int g = 0; g < groups; ++g) {
    keep.clear();
    for (int s = 0; s < samples; ++s)
      if (s % groups != g) keep.push_back(s);
    loo.push_back(stat(keep));
  }
  const double m = stats::mean(loo);
  double ss = 0.0;
  for (double v : loo) ss += (v - m) * (v - m);
  return std::sqrt((groups - 1.0) / groups * ss);
}

inline std::vector<int> all_indices(int s) {
  std::vector<int> v(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) v[i] = i;
  return v;
}

inline std::vector<double> pick(const std::vector<double>& x, const std::vector<int>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(x[i]);
  return out;
}

inline std::vector<double> as_double(const std::vector<int>& v) { return {v.begin(), v.end()}; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Per-sample tables
// ---------------------------------------------------------------------------

/// log Z_n and log Z^-_n for every sample at every n of the grid.
struct PartitionSamples {
  std::vector<int> n;
  /// [n index][sample]
  std::vector<std::vector<double>> log_z, log_z_minus;
};

inline PartitionSamples partition_samples(const McConfig& cfg, double h, const std::vector<int>& ns) {
  const int n_max = ns.back();
  struct Row {
    std::vector<double> lz, lzm;
  };
  auto rows = parallel_map<Row>(static_cast<std::size_t>(cfg.samples), cfg.workers, [&](std::size_t s) {
    const auto sys = log_partition(cfg.law, h, cfg.sample(static_cast<int>(s), n_max), n_max,
                                   QuenchedSystem::Tables::prefix_only);
    Row r;
    for (int n : ns) {
      r.lz.push_back(sys.log_z_prefix(n));
      r.lzm.push_back(sys.log_z_prefix(n) - sys.field(n));
    }
    return r;
  });
  PartitionSamples out;
  out.n = ns;
  out.log_z.assign(ns.size(), std::vector<double>(static_cast<std::size_t>(cfg.samples)));
  out.log_z_minus = out.log_z;
  for (std::size_t s = 0; s < rows.size(); ++s)
    for (std::size_t k = 0; k < ns.size(); ++k) {
      out.log_z[k][s] = rows[s].lz[k];
      out.log_z_minus[k][s] = rows[s].lzm[k];
    }
  return out;
}

/// kappa_1 and kappa_2 of L_n for every sample at every n of the grid.
struct CumulantSamples {
  std::vector<int> n;
  /// [n index][sample]
  std::vector<std::vector<double>> kappa1, kappa2;
};

inline CumulantSamples cumulant_samples(const McConfig& cfg, double h, const std::vector<int>& ns,
                                        int first_index = 0) {
  const int n_max = ns.back();
  struct Row {
    std::vector<double> k1, k2;
  };
  auto rows = parallel_map<Row>(static_cast<std::size_t>(cfg.samples), cfg.workers, [&](std::size_t s) {
    const auto sys = log_partition(cfg.law, h, cfg.sample(first_index + static_cast<int>(s), n_max), n_max,
                                   QuenchedSystem::Tables::prefix_only);
    const auto all = prefix_cumulants(sys, 2);
    Row r;
    for (int n : ns) {
      r.k1.push_back(all[n][1]);
      r.k2.push_back(all[n][2]);
    }
    return r;
  });
  CumulantSamples out;
  out.n = ns;
  out.kappa1.assign(ns.size(), std::vector<double>(static_cast<std::size_t>(cfg.samples)));
  out.kappa2 = out.kappa1;
  for (std::size_t s = 0; s < rows.size(); ++s)
    for (std::size_t k = 0; k < ns.size(); ++k) {
      out.kappa1[k][s] = rows[s].k1[k];
      out.kappa2[k][s] = rows[s].k2[k];
    }
  return out;
}

// ---------------------------------------------------------------------------
// Free energy
// ---------------------------------------------------------------------------

struct FreeEnergyEstimate {
  EstimateSeries quenched;
  /// (1/n) log of the sample mean of Z.
  double annealed = 0.0;
  bool jensen_holds = true;
  std::vector<double> log_z;
};

inline FreeEnergyEstimate free_energy_from(double h, int n, const std::vector<double>& log_z) {
  FreeEnergyEstimate e;
  e.log_z = log_z;
  std::vector<double> f(log_z);
  for (auto& v : f) v /= n;
  e.quenched = {Quantity::f, h, n, stats::mean(f), stats::stderr_of_mean(f), static_cast<int>(f.size())};
  e.annealed = stats::log_mean_exp(log_z) / n;
  e.jensen_holds = e.quenched.mean <= e.annealed + 1e-12 * std::max(1.0, std::abs(e.annealed));
  return e;
}

inline FreeEnergyEstimate estimate_f(const McConfig& cfg, double h, int n) {
  cfg.validate();
  const auto ps = partition_samples(cfg, h, {n});
  return free_energy_from(h, n, ps.log_z[0]);
}

// ---------------------------------------------------------------------------
// mu(h)
// ---------------------------------------------------------------------------

struct MuEstimate {
  double h = 0.0;
  std::vector<int> n;
  /// -(1/n) log mean(1/Z^-_n), its jackknife error, and the variant through
  /// the probability that the first excursion spans the system.
  std::vector<double> mu_n, mu_n_stderr, mu_t1_n;
  /// (1/n) mean log Z^-_n and its standard error.
  std::vector<double> f_n, f_n_stderr;
  /// Slopes across the n grid.
  EstimateSeries mu, mu_t1, f;
};

inline MuEstimate mu_from(const McConfig& cfg, double h, const PartitionSamples& ps) {
  const int S = cfg.samples;
  const std::size_t N = ps.n.size();
  const auto xs = detail::as_double(ps.n);
  auto curves = [&](const std::vector<int>& idx, std::vector<double>& ymu, std::vector<double>& yt1,
                    std::vector<double>& yf) {
    ymu.assign(N, 0.0);
    yt1.assign(N, 0.0);
    yf.assign(N, 0.0);
    std::vector<double> tmp;
    for (std::size_t k = 0; k < N; ++k) {
      tmp.clear();
      for (int s : idx) tmp.push_back(-ps.log_z_minus[k][s]);
      ymu[k] = -stats::log_mean_exp(tmp);
      yt1[k] = ymu[k] - cfg.law.log_p(ps.n[k]);
      for (auto& v : tmp) v = -v;
      yf[k] = stats::mean(tmp);
    }
  };
  MuEstimate e;
  e.h = h;
  e.n = ps.n;
  std::vector<double> ymu, yt1, yf;
  curves(detail::all_indices(S), ymu, yt1, yf);
  for (std::size_t k = 0; k < N; ++k) {
    const double n = ps.n[k];
    e.mu_n.push_back(ymu[k] / n);
    e.mu_t1_n.push_back(yt1[k] / n);
    e.f_n.push_back(yf[k] / n);
    e.f_n_stderr.push_back(stats::stderr_of_mean(ps.log_z_minus[k]) / n);
    e.mu_n_stderr.push_back(detail::jackknife_over_samples(S, [&](const std::vector<int>& idx) {
                              return -stats::log_mean_exp([&] {
                                       std::vector<double> t;
                                       for (int s : idx) t.push_back(-ps.log_z_minus[k][s]);
                                       return t;
                                     }()) /
                                     n;
                            }));
  }
  const int nmax = ps.n.back();
  if (N >= 2) {
    auto slope_of = [&](int which) {
      return [&, which](const std::vector<int>& idx) {
        std::vector<double> a, b, c;
        curves(idx, a, b, c);
        return stats::linear_fit(xs, which == 0 ? a : which == 1 ? b : c).slope;
      };
    };
    e.mu = {Quantity::mu, h, nmax, stats::linear_fit(xs, ymu).slope, detail::jackknife_over_samples(S, slope_of(0)), S};
    e.mu_t1 = {Quantity::mu, h, nmax, stats::linear_fit(xs, yt1).slope, detail::jackknife_over_samples(S, slope_of(1)),
               S};
    e.f = {Quantity::f, h, nmax, stats::linear_fit(xs, yf).slope, detail::jackknife_over_samples(S, slope_of(2)), S};
  }
  return e;
}

/// mu(h) as the slope of -log mean(1/Z^-_n) across the n grid.
inline MuEstimate estimate_mu(const McConfig& cfg, double h) {
  cfg.validate();
  if (cfg.n_values.size() < 3) throw std::invalid_argument("estimate_mu: the n grid needs at least 3 points");
  return mu_from(cfg, h, partition_samples(cfg, h, cfg.n_values));
}

// ---------------------------------------------------------------------------
// Random centering E_{n,h,omega}[L_n]
// ---------------------------------------------------------------------------

struct CenteringStats {
  double h = 0.0;
  int n = 0;
  int samples = 0;
  double mean = 0.0, mean_stderr = 0.0;
  /// Sample variance of the centering divided by n.
  double variance_per_n = 0.0, variance_per_n_stderr = 0.0;
  /// Kolmogorov distance of the standardized centering to the normal law;
  /// NaN when degenerate.
  double ks = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;
  double k3_per_n = 0.0, k3_stderr = 0.0, k4_per_n = 0.0, k4_stderr = 0.0;
};

inline CenteringStats summarize_centering(double h, int n, const std::vector<double>& k1) {
  CenteringStats c;
  c.h = h;
  c.n = n;
  c.samples = static_cast<int>(k1.size());
  c.mean = stats::mean(k1);
  c.mean_stderr = stats::stderr_of_mean(k1);
  const double var = stats::variance(k1);
  c.variance_per_n = var / n;
  c.degenerate = !(var > 0.0);
  if (c.degenerate) return c;
  const double S = static_cast<double>(k1.size());
  double m4 = 0.0;
  for (double v : k1) m4 += std::pow(v - c.mean, 4);
  m4 /= S;
  c.variance_per_n_stderr = std::sqrt(std::max(0.0, (m4 - (S - 3) / (S - 1) * var * var) / S)) / n;
  c.ks = stats::ks_standardized(k1);
  if (k1.size() >= 4) {
    const auto k = stats::k_statistics(k1);
    c.k3_per_n = k.k3 / n;
    c.k4_per_n = k.k4 / n;
    c.k3_stderr = stats::jackknife_stderr(k1, [](std::span<const double> x) { return stats::k_statistics(x).k3; }) / n;
    c.k4_stderr = stats::jackknife_stderr(k1, [](std::span<const double> x) { return stats::k_statistics(x).k4; }) / n;
  }
  return c;
}

inline CenteringStats centering_statistics(const McConfig& cfg, double h, int n) {
  cfg.validate();
  if (cfg.samples < 100) throw std::invalid_argument("centering_statistics: the normal-law metrics need samples >= 100");
  const auto cs = cumulant_samples(cfg, h, {n});
  return summarize_centering(h, n, cs.kappa1[0]);
}

// ---------------------------------------------------------------------------
// Correlation decay
// ---------------------------------------------------------------------------

namespace detail {

/// |cov[X_a, X_{a+g}]| / min(E X_a, E X_{a+g}) for g = 1..max_gap, in 50-digit
/// arithmetic: the covariance is a difference of O(1) terms and falls below
/// double precision after a few sites.
inline std::vector<double> mixing_proxy_series(const QuenchedSystem& sys, int a, int max_gap) {
  using Real = boost::multiprecision::cpp_bin_float_50;
  const int n = sys.n();
  std::vector<Real> P(static_cast<std::size_t>(n) + 1), E(static_cast<std::size_t>(n) + 1);
  for (int t = 1; t <= n; ++t) {
    P[t] = exp(Real(sys.log_p(t)));
    E[t] = exp(Real(sys.field(t)));
  }
  std::vector<Real> pre(static_cast<std::size_t>(n) + 1), suf(static_cast<std::size_t>(n) + 1),
      seg(static_cast<std::size_t>(max_gap) + 1);
  pre[0] = 1;
  for (int k = 1; k <= n; ++k) {
    Real s = 0;
    for (int t = 1; t <= k; ++t) s += pre[k - t] * P[t];
    pre[k] = s * E[k];
  }
  suf[n] = 1;
  for (int k = n - 1; k >= 0; --k) {
    Real s = 0;
    for (int t = 1; k + t <= n; ++t) s += P[t] * E[k + t] * suf[k + t];
    suf[k] = s;
  }
  seg[0] = 1;
  for (int x = 1; x <= max_gap; ++x) {
    Real s = 0;
    for (int t = 1; t <= x; ++t) s += seg[x - t] * P[t];
    seg[x] = s * E[a + x];
  }
  const Real ea = pre[a] * suf[a] / pre[n];
  std::vector<double> out;
  for (int g = 1; g <= max_gap; ++g) {
    const int b = a + g;
    const Real eb = pre[b] * suf[b] / pre[n];
    const Real eab = pre[a] * seg[g] * suf[b] / pre[n];
    out.push_back(static_cast<double>(abs(eab - ea * eb) / (ea < eb ? ea : eb)));
  }
  return out;
}

}  // namespace detail

struct DecayOptions {
  int window = 96;
  int offsets = 4;
  int fit_lo = 8;
  int fit_hi = 64;
  /// Mixing proxy gaps 1..max_gap.
  int max_gap = 40;
  /// Mixing values below this are treated as unresolved.
  double floor = 1e-40;
};

struct DecayResult {
  double h = 0.0;
  int samples = 0;
  /// log of the mean of a_j over samples and offsets, j = 1..J (entry 0
  /// unused).
  std::vector<double> log_mean_a;
  stats::LinearFit fit;
  double gamma_hat = 0.0, gamma_stderr = 0.0, G_hat = 0.0;
  bool at_floor = false;
  /// Mean of |cov[X_a, X_b]| / min(E X_a, E X_b) at gaps 1..max_gap.
  std::vector<double> mixing_gap, mixing_proxy;
  stats::LinearFit mixing_fit;
  double mixing_gamma = 0.0, mixing_gamma_stderr = 0.0;
  bool mixing_fitted = false;
};

inline DecayResult correlation_decay_scan(const McConfig& cfg, double h, const DecayOptions& opt = {}) {
  if (opt.window < 16) throw std::invalid_argument("correlation_decay_scan: window must be >= 16");
  if (opt.fit_lo < 1 || opt.fit_hi > opt.window || opt.fit_lo >= opt.fit_hi)
    throw std::invalid_argument("correlation_decay_scan: bad fit range");
  const int J = opt.window;
  const int stride = std::max(1, J / 4);
  const int n_sys = J + (opt.offsets - 1) * stride + 1;
  if (n_sys > cfg.law.n_max()) throw std::out_of_range("correlation_decay_scan: window exceeds the law's horizon");
  struct Row {
    std::vector<std::vector<double>> log_a;
    std::vector<double> proxy;
  };
  const int a0 = n_sys / 4;
  const int max_gap = std::min(opt.max_gap, n_sys - a0 - 1);
  auto rows = parallel_map<Row>(static_cast<std::size_t>(cfg.samples), cfg.workers, [&](std::size_t s) {
    const auto sys = log_partition(cfg.law, h, cfg.sample(static_cast<int>(s), n_sys), n_sys,
                                   QuenchedSystem::Tables::prefix_only);
    const SegmentTable table(sys, J);
    Row r;
    for (int k = 0; k < opt.offsets; ++k) {
      const auto av = two_replica_avoidance(sys, table, J, k * stride);
      std::vector<double> la(static_cast<std::size_t>(J) + 1, 0.0);
      for (int j = 1; j <= J; ++j) la[j] = av.a[j] > 0.0 ? std::log(av.a[j]) : -std::numeric_limits<double>::infinity();
      r.log_a.push_back(std::move(la));
    }
    r.proxy = detail::mixing_proxy_series(sys, a0, max_gap);
    return r;
  });
  DecayResult out;
  out.h = h;
  out.samples = cfg.samples;
  out.log_mean_a.assign(static_cast<std::size_t>(J) + 1, 0.0);
  std::vector<double> col;
  for (int j = 1; j <= J; ++j) {
    col.clear();
    for (const auto& r : rows)
      for (const auto& la : r.log_a) col.push_back(la[j]);
    out.log_mean_a[j] = stats::log_mean_exp(col);
  }
  std::vector<double> xs, ys;
  for (int j = opt.fit_lo; j <= opt.fit_hi; ++j)
    if (std::isfinite(out.log_mean_a[j])) {
      xs.push_back(j);
      ys.push_back(out.log_mean_a[j]);
    }
  out.at_floor = xs.size() < 3;
  if (!out.at_floor) {
    out.fit = stats::linear_fit(xs, ys);
    out.gamma_hat = -out.fit.slope;
    out.gamma_stderr = out.fit.slope_stderr;
    out.G_hat = std::exp(out.fit.intercept);
  }
  xs.clear();
  ys.clear();
  for (int g = 1; g <= max_gap; ++g) {
    double m = 0.0;
    for (const auto& r : rows) m += r.proxy[g - 1];
    m /= static_cast<double>(rows.size());
    out.mixing_gap.push_back(g);
    out.mixing_proxy.push_back(m);
    if (m > opt.floor) {
      xs.push_back(g);
      ys.push_back(std::log(m));
    }
  }
  out.mixing_fitted = xs.size() >= 3;
  if (out.mixing_fitted) {
    out.mixing_fit = stats::linear_fit(xs, ys);
    out.mixing_gamma = -out.mixing_fit.slope;
    out.mixing_gamma_stderr = out.mixing_fit.slope_stderr;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Concentration
// ---------------------------------------------------------------------------

struct TailFit {
  std::vector<double> frequency, upper;
  /// Largest kappa with 2 exp(-kappa u^2 / (n + u)) above every upper bound.
  double kappa_linear = std::numeric_limits<double>::infinity();
  /// Same with u^{5/3} in place of u in the denominator.
  double kappa_five_thirds = std::numeric_limits<double>::infinity();
  bool degenerate = false;
};

/// Fits the two bound forms to exceedance upper bounds at the u grid.
inline TailFit fit_tail(const std::vector<double>& u, const std::vector<double>& frequency,
                        const std::vector<double>& upper, int n, bool degenerate) {
  TailFit t;
  t.frequency = frequency;
  t.upper = upper;
  t.degenerate = degenerate;
  if (degenerate) return t;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] > 0.0)) continue;
    const double c = -std::log(upper[i] / 2.0) / (u[i] * u[i]);
    t.kappa_linear = std::min(t.kappa_linear, c * (n + u[i]));
    t.kappa_five_thirds = std::min(t.kappa_five_thirds, c * (n + std::pow(u[i], 5.0 / 3.0)));
  }
  return t;
}

inline TailFit empirical_tail(const std::vector<double>& x, const std::vector<double>& u, int n) {
  const double m = stats::mean(x);
  const bool degenerate = !(stats::variance(x) > 0.0);
  std::vector<double> freq, upper;
  for (double ui : u) {
    std::size_t k = 0;
    for (double v : x)
      if (std::abs(v - m) >= ui) ++k;
    freq.push_back(static_cast<double>(k) / static_cast<double>(x.size()));
    upper.push_back(stats::wilson_upper(k, x.size()));
  }
  return fit_tail(u, freq, upper, n, degenerate);
}

struct ConcentrationResult {
  double h = 0.0;
  int n = 0;
  int samples = 0;
  std::vector<double> u;
  /// log Z_n and the centering E_{n,h,omega}[L_n].
  TailFit free_energy, centering;
};

inline std::vector<double> default_u_grid(int n, int points = 12) {
  std::vector<double> u;
  for (int k = 0; k < points; ++k) u.push_back(0.4 * k * std::sqrt(static_cast<double>(n)));
  return u;
}

inline ConcentrationResult concentration_scan(const McConfig& cfg, double h, int n, const std::vector<double>& u_grid) {
  cfg.validate();
  if (cfg.samples < 500) throw std::invalid_argument("concentration_scan: samples must be >= 500");
  const auto cs = cumulant_samples(cfg, h, {n});
  const auto ps = partition_samples(cfg, h, {n});
  ConcentrationResult r;
  r.h = h;
  r.n = n;
  r.samples = cfg.samples;
  r.u = u_grid;
  r.free_energy = empirical_tail(ps.log_z[0], u_grid, n);
  r.centering = empirical_tail(cs.kappa1[0], u_grid, n);
  return r;
}

// ---------------------------------------------------------------------------
// Critical point bracket
// ---------------------------------------------------------------------------

struct HcBracket {
  double lo = 0.0, hi = 0.0;
  int evaluations = 0;
};

struct HcOptions {
  double tolerance = 1e-2;
  /// Slopes below this are treated as zero.
  double slope_floor = 1e-12;
};

/// Whether the free-energy slope across the n grid is significantly positive.
inline bool localized_test(const McConfig& cfg, double h, const HcOptions& opt) {
  const auto ps = partition_samples(cfg, h, cfg.n_values);
  const auto xs = detail::as_double(ps.n);
  auto slope = [&](const std::vector<int>& idx) {
    std::vector<double> y;
    for (const auto& row : ps.log_z) y.push_back(stats::mean(detail::pick(row, idx)));
    return stats::linear_fit(xs, y).slope;
  };
  const double f = slope(detail::all_indices(cfg.samples));
  const double se = detail::jackknife_over_samples(cfg.samples, slope);
  return f > 3.0 * std::max(se, opt.slope_floor);
}

/// Brackets the empirical localization transition on the h grid, then
/// bisects to the requested tolerance.
inline HcBracket hc_bracket(const McConfig& cfg, const HcOptions& opt = {}) {
  cfg.validate();
  if (cfg.n_values.size() < 2) throw std::invalid_argument("hc_bracket: the n grid needs at least 2 points");
  HcBracket b;
  std::optional<std::size_t> change;
  bool prev = false;
  for (std::size_t i = 0; i < cfg.h_values.size(); ++i) {
    const bool t = localized_test(cfg, cfg.h_values[i], opt);
    ++b.evaluations;
    if (i > 0 && !prev && t) {
      change = i;
      break;
    }
    prev = t;
  }
  if (!change) throw std::runtime_error("hc_bracket: no sign change of the localization test on the h grid");
  b.lo = cfg.h_values[*change - 1];
  b.hi = cfg.h_values[*change];
  while (b.hi - b.lo > opt.tolerance) {
    const double mid = 0.5 * (b.lo + b.hi);
    if (localized_test(cfg, mid, opt))
      b.hi = mid;
    else
      b.lo = mid;
    ++b.evaluations;
  }
  return b;
}

}  // namespace pinlab
