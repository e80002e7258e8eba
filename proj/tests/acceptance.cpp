// Acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pinlab/cli.hpp"
#include "pinlab/disorder_mc.hpp"
#include "pinlab/io.hpp"
#include "pinlab/oracle.hpp"
#include "pinlab/quenched_dp.hpp"
#include "pinlab/theorems.hpp"
#include "test_support.hpp"

namespace {

using namespace pinlab;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Detail {
 public:
  template <class T>
  Detail& operator()(const std::string& k, const T& v) {
    os_ << (first_ ? "" : ", ") << k << "=" << v;
    first_ = false;
    return *this;
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
  bool first_ = true;
};

std::string g(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

InterArrivalLaw alpha_one(int n_max = 4096) { return build_law(1.0, EllConstant{1.0}, n_max, true); }

CheckConfig regime(int samples, std::vector<int> ns) {
  CheckConfig c;
  c.mc.law = alpha_one();
  c.mc.disorder = DisorderLaw::gaussian(1.0);
  c.mc.h_values = {3.0};
  c.mc.n_values = std::move(ns);
  c.mc.samples = samples;
  c.mc.master_seed = 2024;
  c.h = 3.0;
  return c;
}

std::string clauses(const CheckReport& r) {
  std::string s;
  for (const auto& c : r.clauses) {
    if (!s.empty()) s += " ";
    s += c.name + ":" + (c.applicable ? (c.holds ? "ok" : "FAILED") : "n/a");
  }
  return s;
}

/// Sum over disjoint pairs of configurations of the product of their
/// probabilities, through a subset-sum transform over interior masks.
double avoidance_by_subset_sums(const oracle::PathSet& set) {
  if (set.n <= 1) return 1.0;
  const int bits = set.n - 1;
  const double lz = set.log_partition();
  std::vector<double> w(std::size_t{1} << bits, 0.0);
  for (const auto& p : set.paths) w[p.interior] += std::exp(p.log_weight - lz);
  auto sub = w;
  for (int b = 0; b < bits; ++b)
    for (std::size_t m = 0; m < sub.size(); ++m)
      if (m & (std::size_t{1} << b)) sub[m] += sub[m ^ (std::size_t{1} << b)];
  const std::size_t full = sub.size() - 1;
  double s = 0.0;
  for (std::size_t m = 0; m < w.size(); ++m) s += w[m] * sub[full ^ m];
  return s;
}

// 1 ---------------------------------------------------------------------------
Outcome oracle_equivalence() {
  double worst_z = 0, worst_p = 0, worst_cov = 0, worst_law = 0, worst_cdf = 0, worst_a = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    const int n = 1 + static_cast<int>(s % 14);
    const auto inst = testing::random_instance(s, n);
    const auto sys = log_partition(inst.law, inst.h, inst.omega, n);
    const auto set = oracle::enumerate_paths(inst.law, inst.h, inst.omega, n);
    worst_z = std::max(worst_z, std::abs(sys.log_z() - set.log_partition()));
    const auto mom = oracle::enumerate_pair_moments(set);
    const SegmentTable table(sys, n);
    for (int a = 0; a <= n; ++a) {
      worst_p = std::max(worst_p, std::abs(contact_probability(sys, a) - mom[a][a]));
      for (int b = a; b <= n; ++b)
        worst_cov = std::max(worst_cov, std::abs(contact_covariance(sys, a, b, &table) - (mom[a][b] - mom[a][a] * mom[b][b])));
    }
    const auto law = contact_law(sys);
    const auto pmf = oracle::enumerate_contact_pmf(set);
    for (int l = 0; l <= n; ++l) worst_law = std::max(worst_law, std::abs(law.pmf(l) - pmf[l]));
    const auto mpmf = oracle::enumerate_max_excursion_pmf(set);
    double cdf = 0.0;
    for (int m = 1; m <= n; ++m) {
      cdf += mpmf[m];
      worst_cdf = std::max(worst_cdf, std::abs(max_excursion_cdf(sys, m) - cdf));
    }
    const auto av = two_replica_avoidance(sys, n);
    for (int j = 1; j <= n; ++j)
      worst_a = std::max(worst_a, std::abs(av.a[j] - avoidance_by_subset_sums(
                                                         oracle::enumerate_paths(inst.law, inst.h, inst.omega, j))));
  }
  const double worst = std::max({worst_z, worst_p, worst_cov, worst_law, worst_cdf, worst_a});
  Detail d;
  d("logZ", g(worst_z))("E[X]", g(worst_p))("cov", g(worst_cov))("law", g(worst_law))("M_cdf", g(worst_cdf))(
      "a_j", g(worst_a));
  return {worst <= 1e-9, "500 instances, max abs errors " + d.str()};
}

// 2 ---------------------------------------------------------------------------
Outcome cumulant_consistency() {
  double worst_law = 0, worst_fd = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const int n = 2 + static_cast<int>((s * 37) % 63);
    const auto inst = testing::random_instance(7000 + s, n);
    const auto sys = log_partition(inst.law, inst.h, inst.omega, n);
    const auto k = cumulants(sys, 4);
    const auto m = contact_law(sys).moments();
    const double want[5] = {0.0, m[1], m[2], m[3], m[4] - 3.0 * m[2] * m[2]};
    for (int r = 1; r <= 4; ++r)
      worst_law = std::max(worst_law, std::abs(k[r] - want[r]) / std::max(std::abs(want[r]), 1e-3 * want[2]));
    const double step = 1e-3;
    auto lz = [&](double dh) { return log_partition(inst.law, inst.h + dh, inst.omega, n).log_z(); };
    const double d1 = (lz(step) - lz(-step)) / (2 * step);
    const double d2 = (lz(step) - 2 * lz(0) + lz(-step)) / (step * step);
    const double d3 = (lz(2 * step) - 2 * lz(step) + 2 * lz(-step) - lz(-2 * step)) / (2 * step * step * step);
    worst_fd = std::max({worst_fd, std::abs(k[1] - d1) / std::abs(k[1]), std::abs(k[2] - d2) / std::abs(k[2]),
                         std::abs(k[3] - d3) / std::max(std::abs(k[3]), k[2])});
  }
  Detail d;
  d("rel_vs_law", g(worst_law))("rel_vs_fd", g(worst_fd));
  return {worst_law <= 1e-8 && worst_fd <= 1e-4, "50 instances n<=64, " + d.str()};
}

// 3 ---------------------------------------------------------------------------
Outcome pure_regression() {
  const double h = std::log(3.0);
  const auto geo = geometric_law(0.5, 4096);
  const auto sys = log_partition(geo, h, DisorderSample::constant(4096, 0.0), 4096, QuenchedSystem::Tables::prefix_only);
  bool decreasing = true;
  double prev = std::numeric_limits<double>::infinity(), err4096 = 0;
  for (int n : {256, 512, 1024, 2048, 4096}) {
    const double e = std::abs(sys.log_z_prefix(n) / n - std::log(2.0));
    if (!(e < prev)) decreasing = false;
    prev = e;
    err4096 = e;
  }
  const double rho = prefix_cumulants(sys, 1)[4096][1] / 4096.0;
  McConfig mc;
  mc.law = geo;
  mc.disorder = DisorderLaw::zero();
  mc.n_values = {1024, 2048, 4096};
  mc.samples = 4;
  const auto mu = estimate_mu(mc, h);
  const auto law = alpha_one();
  double worst_alpha = 0;
  for (double ha : {0.5, 1.0, 2.0, 3.0}) {
    const auto s1 = log_partition(law, ha, DisorderSample::constant(4096, 0.0), 4096, QuenchedSystem::Tables::prefix_only);
    worst_alpha = std::max(worst_alpha, std::abs(s1.log_z() / 4096 - oracle::pure_model_free_energy(law, ha)));
  }
  const bool pass = err4096 <= 1e-2 && decreasing && std::abs(rho - 0.75) <= 1e-2 && mu.mu.mean == mu.f.mean &&
                    worst_alpha <= 1e-2;
  Detail d;
  d("|f_4096-log2|", g(err4096))("decreasing", decreasing)("rho", g(rho))("mu==f", mu.mu.mean == mu.f.mean)(
      "alpha1_max_err", g(worst_alpha));
  return {pass, d.str()};
}

// 4 ---------------------------------------------------------------------------
Outcome inequality_suite() {
  int jensen = 0, bound = 0, exchange = 0, fact = 0;
  double worst_fact = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const int n = 2 + static_cast<int>(s % 9);
    const auto inst = testing::random_instance(90000 + s, n);
    const double xi = inst.law.xi();
    const auto sys = log_partition(inst.law, inst.h, inst.omega, n);
    const auto set = oracle::enumerate_paths(inst.law, inst.h, inst.omega, n);
    CounterRng rng(77, s);
    // arbitrary functions of the bits, tabulated on random values
    std::vector<double> phi_tab(std::size_t{1} << (n + 1)), psi_tab(phi_tab.size());
    for (auto& v : phi_tab) v = rng.uniform();
    for (auto& v : psi_tab) v = rng.uniform();
    auto bits = [](std::span<const int> x, int lo, int hi) {
      std::size_t m = 1;  // leading 1 keeps ranges of different length apart
      for (int b = lo; b <= hi; ++b) m = (m << 1) | static_cast<std::size_t>(x[b]);
      return m % (std::size_t{1} << 20);
    };
    for (int a = 1; a < n; ++a) {
      const double lb = 1.0 / (1.0 + xi * std::exp(-inst.h - inst.omega.at(a)) * std::min(std::pow(a, xi), std::pow(n - a, xi)));
      if (contact_probability(sys, a) < lb * (1 - 1e-12)) ++bound;
      auto phi = [&](std::span<const int> x) { return phi_tab[bits(x, 0, a - 1) % phi_tab.size()]; };
      auto psi = [&](std::span<const int> x) { return psi_tab[bits(x, a + 1, n) % psi_tab.size()]; };
      const double lhs = oracle::enumerate_expectation(set, [&](auto x) { return phi(x) * (1 - x[a]) * psi(x); });
      const double rhs = oracle::enumerate_expectation(set, [&](auto x) { return phi(x) * x[a] * psi(x); });
      const double factor = xi * std::exp(-inst.h - inst.omega.at(a)) * std::min(std::pow(a, xi), std::pow(n - a, xi));
      if (lhs > factor * rhs * (1 + 1e-12) + 1e-300) ++exchange;
    }
    for (int a = 0; a <= n; ++a) {
      // functions in M: values in [-1, 1]
      auto phi = [&](std::span<const int> x) { return 2 * phi_tab[bits(x, 0, a) % phi_tab.size()] - 1; };
      auto psi = [&](std::span<const int> x) { return 2 * psi_tab[bits(x, a, n) % psi_tab.size()] - 1; };
      const double ea = oracle::enumerate_expectation(set, [&](auto x) { return 1.0 * x[a]; });
      const double both = oracle::enumerate_expectation(set, [&](auto x) { return phi(x) * psi(x) * x[a]; }) / ea;
      const auto left = oracle::enumerate_paths(inst.law, inst.h, inst.omega, a);
      std::vector<double> shifted(inst.omega.omega.begin() + a, inst.omega.omega.end());
      const auto right = oracle::enumerate_paths(inst.law, inst.h, DisorderSample::from(shifted), n - a);
      const double el = oracle::enumerate_expectation(left, [&](auto x) { return 2 * phi_tab[bits(x, 0, a) % phi_tab.size()] - 1; });
      const double er = oracle::enumerate_expectation(
          right, [&](auto x) { return 2 * psi_tab[bits(x, 0, n - a) % psi_tab.size()] - 1; });
      const double r = std::abs(both - el * er);
      worst_fact = std::max(worst_fact, r);
      if (r > 1e-12) ++fact;
    }
  }
  // Jensen: quenched mean of log Z below the exact annealed value, for every family
  for (std::uint64_t f = 0; f < 5; ++f) {
    const auto dl = testing::family_for(f);
    const auto law = alpha_one(512);
    for (double h : {1.0, 3.0}) {
      std::vector<double> lz;
      for (int s = 0; s < 40; ++s)
        lz.push_back(log_partition(law, h, sample_disorder(dl, 256, 5, s), 256, QuenchedSystem::Tables::prefix_only).log_z());
      const double annealed =
          log_partition(law, h + dl.log_mgf_at_one(), DisorderSample::constant(256, 0.0), 256).log_z();
      if (stats::mean(lz) > annealed + 1e-9) ++jensen;
      if (!free_energy_from(h, 256, lz).jensen_holds) ++jensen;
    }
  }
  // the catalog checks at acceptance scale
  auto c = regime(20, {64, 128, 256});
  const auto c9 = run_check(CheckId::C9, c);
  const auto c10 = run_check(CheckId::C10, c);
  Detail d;
  d("jensen_violations", jensen)("contact_bound_violations", bound)("exchange_violations", exchange)(
      "factorization_violations", fact)("max_residual", g(worst_fact))("C9", to_string(c9.status))(
      "C10", to_string(c10.status))("C10_residual", g(c10.metric("max_residual")));
  return {jensen + bound + exchange + fact == 0 && c9.passed() && c10.passed(), "200 instances, " + d.str()};
}

// 5 ---------------------------------------------------------------------------
Outcome correlation_decay() {
  auto c = regime(200, {128});
  c.decay.window = 96;
  c.decay.fit_lo = 8;
  c.decay.fit_hi = 64;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_check(CheckId::C7, c);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Detail d;
  d("gamma", g(r.constant("gamma").value))("se", g(r.constant("gamma").stderr))("R2", g(r.metric("avoidance_r2")))(
      "G", g(r.constant("G").value))("gamma_mixing", g(r.constant("gamma_mixing").value))("seconds", g(secs));
  return {r.passed() && secs < 300, d.str() + "; " + clauses(r)};
}

// 6 ---------------------------------------------------------------------------
Outcome quenched_clt() {
  auto c = regime(5, {128, 256, 512, 1024});
  c.seeds = 5;
  const auto r = run_check(CheckId::C2, c);
  Detail d;
  for (int n : {128, 256, 512, 1024}) d("mean_ks_n" + std::to_string(n), g(r.metric("ks.mean.n" + std::to_string(n))));
  return {r.passed(), d.str() + "; " + clauses(r)};
}

// 7 ---------------------------------------------------------------------------
Outcome centering_suite() {
  auto c = regime(2000, {128, 256, 512});
  const auto r = run_check(CheckId::C4, c);
  auto p = c;
  p.mc.disorder = DisorderLaw::zero();
  p.mc.samples = 20;
  const auto rp = run_check(CheckId::C4, p);
  const bool pure_ok = rp.constant("w").value == 0.0 && !rp.clause("w_positive").applicable;
  Detail d;
  d("w", g(r.constant("w").value))("se", g(r.constant("w").stderr))("ks", g(r.metric("ks")))("c", g(r.constant("c").value))(
      "rho", g(r.constant("rho").value))("pure_w", rp.constant("w").value);
  return {r.passed() && pure_ok, d.str() + "; " + clauses(r)};
}

// 8 ---------------------------------------------------------------------------
Outcome concentration() {
  auto c = regime(2000, {256});
  const auto r = run_check(CheckId::C3, c);
  Detail d;
  d("kappa_free_energy", g(r.constant("kappa_free_energy_linear").value))(
      "kappa_free_energy_5/3", g(r.constant("kappa_free_energy_five_thirds").value))(
      "kappa_centering", g(r.constant("kappa_centering_linear").value))(
      "kappa_centering_5/3", g(r.constant("kappa_centering_five_thirds").value))(
      "kappa_omega_min", g(r.constant("kappa_omega_min").value));
  return {r.passed(), d.str() + "; " + clauses(r)};
}

// 9 ---------------------------------------------------------------------------
Outcome mu_bounds() {
  auto c = regime(200, {128, 256, 512});
  c.mc.h_values = {1.5, 2.0, 2.5, 3.0, 3.5};
  const auto r = run_check(CheckId::C5, c);
  Detail d;
  d("c", g(r.constant("c").value))("se", g(r.constant("c").stderr));
  for (double h : c.mc.h_values) {
    std::ostringstream k;
    k << ".h" << h;
    d("mu" + k.str(), g(r.constant("mu" + k.str()).value))("f" + k.str(), g(r.constant("f" + k.str()).value));
  }
  return {r.passed(), d.str() + "; " + clauses(r)};
}

// 10 --------------------------------------------------------------------------
Outcome max_excursion() {
  const std::vector<int> ns{256, 512, 1024, 2048, 4096};
  auto pure = regime(4, ns);
  pure.mc.disorder = DisorderLaw::zero();
  auto dis = regime(100, ns);
  const auto rp = run_check(CheckId::C6, pure);
  const auto rd = run_check(CheckId::C6, dis);
  Detail d;
  for (const auto* r : {&rp, &rd}) {
    const std::string tag = r == &rp ? "pure" : "gauss";
    d(tag + "_mu", g(r->constant("mu").value));
    for (int n : ns) d(tag + "_mass_n" + std::to_string(n), g(r->metric("mass.n" + std::to_string(n))));
  }
  return {rp.passed() && rd.passed(), d.str() + "; pure: " + clauses(rp) + "; gaussian: " + clauses(rd)};
}

// 11 --------------------------------------------------------------------------
Outcome hardy_littlewood() {
  auto c = regime(50, {64, 128, 256, 512, 1024, 2048, 4096});
  c.hl_seeds = 10;
  const auto r = run_check(CheckId::C11, c);
  Detail d;
  d("slope", g(r.constant("trend_slope").value))("se", g(r.constant("trend_slope").stderr))(
      "max_ratio", g(r.metric("max_ratio")))("rho", g(r.constant("rho").value));
  return {r.passed(), d.str() + "; " + clauses(r)};
}

// 12 --------------------------------------------------------------------------
Outcome determinism() {
  const auto root = fs::temp_directory_path() / "pinlab_acceptance_determinism";
  fs::remove_all(root);
  io::atomic_write(root / "config.yaml", R"(model:
  kind: regular
  alpha: 1.0
  n_max: 1024
disorder:
  family: gaussian
  param: 1.0
grids:
  h_values: [2.0, 3.0]
  n_values: [64, 128, 256]
  window: 32
  decay_fit: [4, 24]
  mixing_gaps: 16
run:
  samples: 24
  master_seed: 31337
checks:
  select: [C1, C2, C4, C7, C8, C9, C10, C11, C12, C13]
  seeds: 3
  hl_seeds: 3
  oracle_instances: 20
  inequality_samples: 4
)");
  const std::vector<std::string> files{"series.csv", "decay.csv", "report.json", "seeds.json", "config.resolved.yaml"};
  std::vector<std::string> reference;
  bool same = true;
  int runs = 0;
  for (int rep = 0; rep < 2; ++rep)
    for (const char* threads : {"1", "4", "8"}) {
      const auto out = root / ("run_" + std::to_string(rep) + "_" + threads);
      std::ostringstream o, e;
      for (const char* cmd : {"scan", "verify"}) {
        const int rc = cli::run({cmd, "--config", (root / "config.yaml").string(), "--out", out.string(), "--threads", threads},
                                o, e);
        if (rc == 1) return {false, std::string(cmd) + " failed: " + e.str()};
      }
      std::vector<std::string> got;
      for (const auto& f : files) got.push_back(io::read_file(out / f));
      if (reference.empty())
        reference = got;
      else if (got != reference)
        same = false;
      ++runs;
    }
  return {same, std::to_string(runs) + " runs of scan+verify with 1/4/8 workers, byte-identical=" + (same ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},   {"cumulant consistency", cumulant_consistency},
      {"pure-model regression", pure_regression},   {"inequality suite", inequality_suite},
      {"correlation decay", correlation_decay},     {"quenched CLT", quenched_clt},
      {"centering suite", centering_suite},         {"concentration", concentration},
      {"mu bounds", mu_bounds},                     {"maximal excursion", max_excursion},
      {"Hardy-Littlewood bound", hardy_littlewood}, {"determinism", determinism}};
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::stoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int k = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), k) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "Criterion " << k << " (" << criteria[i].first << "): " << (o.pass ? "PASS" : "FAIL") << "  ["
              << o.detail << "; " << g(secs) << " s]" << std::endl;
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
