#pragma once

// The pinlab command line: compute, scan, verify, report.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pinlab/config.hpp"
#include "pinlab/disorder_mc.hpp"
#include "pinlab/io.hpp"
#include "pinlab/quenched_dp.hpp"
#include "pinlab/theorems.hpp"

namespace pinlab::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCheckFailed = 2;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> checks;
  std::optional<int> threads;
};

inline fs::path output_dir(const RunConfig& cfg, const Flags& f) {
  if (f.out) return *f.out;
  if (!cfg.output.empty()) return cfg.output;
  if (const char* env = std::getenv("PINLAB_OUT"); env && *env) return env;
  return "pinlab_out";
}

inline RunConfig resolve(const Flags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (f.seed) cfg.master_seed = *f.seed;
  if (f.threads) {
    if (*f.threads < 1) throw config_error("--threads must be >= 1");
    cfg.threads = *f.threads;
  }
  if (f.checks) {
    cfg.select.clear();
    for (const auto& s : io::split(*f.checks, ','))
      if (!s.empty()) {
        try {
          check_id_from_string(s);
        } catch (const std::invalid_argument& e) {
          throw config_error(std::string("--checks: ") + e.what());
        }
        cfg.select.push_back(s);
      }
  }
  return cfg;
}

inline void write_common(const fs::path& dir, const RunConfig& cfg) {
  io::atomic_write(dir / "config.resolved.yaml", to_yaml(cfg));
  io::atomic_write(dir / "seeds.json", io::seeds_json(cfg.master_seed));
}

// -- compute --------------------------------------------------------------------

inline std::vector<io::SeriesRow> compute_rows(const RunConfig& cfg, const InterArrivalLaw& law) {
  std::vector<io::SeriesRow> rows;
  const int N = cfg.n_values.back();
  const auto omega = sample_disorder(cfg.disorder, N, cfg.master_seed, static_cast<std::uint64_t>(cfg.sample_index));
  for (double h : cfg.h_values) {
    const auto sys = log_partition(law, h, omega, N, QuenchedSystem::Tables::prefix_only);
    const auto k = prefix_cumulants(sys, 2);
    for (int n : cfg.n_values) {
      rows.push_back({"log_z", h, n, sys.log_z_prefix(n), 0.0, 1});
      rows.push_back({"log_z_minus", h, n, sys.log_z_prefix(n) - sys.field(n), 0.0, 1});
      rows.push_back({"mean_contacts", h, n, k[n][1], 0.0, 1});
      rows.push_back({"var_contacts", h, n, k[n][2], 0.0, 1});
    }
  }
  return rows;
}

// -- scan -----------------------------------------------------------------------

struct ScanOutput {
  std::vector<io::SeriesRow> series;
  /// "series,h,j,value" rows for the avoidance and mixing decay curves.
  std::string decay_csv;
};

inline ScanOutput scan(const RunConfig& cfg, const InterArrivalLaw& law) {
  const auto mc = cfg.mc_config(law);
  mc.validate();
  std::set<std::string> want(cfg.quantities.begin(), cfg.quantities.end());
  auto on = [&](Quantity q) { return want.empty() || want.count(to_string(q)) > 0; };
  const auto& ns = cfg.n_values;
  const int S = cfg.samples;
  const int N = ns.back();
  ScanOutput out;
  out.decay_csv = "series,h,j,value\n";
  auto row = [&](Quantity q, double h, int n, double v, double se, int s) {
    out.series.push_back({to_string(q), h, n, v, se, s});
  };
  for (double h : cfg.h_values) {
    if (on(Quantity::f) || on(Quantity::mu)) {
      const auto ps = partition_samples(mc, h, ns);
      if (on(Quantity::f))
        for (std::size_t k = 0; k < ns.size(); ++k) {
          const auto e = free_energy_from(h, ns[k], ps.log_z[k]);
          row(Quantity::f, h, ns[k], e.quenched.mean, e.quenched.stderr, S);
        }
      if (on(Quantity::mu) && ns.size() >= 3) {
        const auto m = mu_from(mc, h, ps);
        row(Quantity::mu, h, N, m.mu.mean, m.mu.stderr, S);
      }
    }
    if (on(Quantity::rho) || on(Quantity::v) || on(Quantity::w) || on(Quantity::centering_mean) ||
        on(Quantity::ks_centering)) {
      std::vector<int> grid = ns;
      const bool doubled = 2 * N <= law.n_max();
      if (doubled) grid.push_back(2 * N);
      const auto cs = cumulant_samples(mc, h, grid);
      for (std::size_t k = 0; k < ns.size(); ++k) {
        std::vector<double> v;
        for (double x : cs.kappa2[k]) v.push_back(x / ns[k]);
        if (on(Quantity::v)) row(Quantity::v, h, ns[k], stats::mean(v), stats::stderr_of_mean(v), S);
        const auto c = summarize_centering(h, ns[k], cs.kappa1[k]);
        if (on(Quantity::centering_mean)) row(Quantity::centering_mean, h, ns[k], c.mean, c.mean_stderr, S);
        if (on(Quantity::w)) row(Quantity::w, h, ns[k], c.variance_per_n, c.variance_per_n_stderr, S);
        if (on(Quantity::ks_centering) && S >= 100 && !c.degenerate)
          row(Quantity::ks_centering, h, ns[k], c.ks, 0.0, S);
      }
      if (on(Quantity::rho) && grid.size() >= 2) {
        const std::size_t hi = grid.size() - 1, lo = hi - 1;
        std::vector<double> r;
        for (int s = 0; s < S; ++s) r.push_back((cs.kappa1[hi][s] - cs.kappa1[lo][s]) / (grid[hi] - grid[lo]));
        row(Quantity::rho, h, grid[hi], stats::mean(r), stats::stderr_of_mean(r), S);
      }
    }
    if (on(Quantity::ks_quenched)) {
      const int seeds = std::min(cfg.seeds, S);
      for (int n : ns) {
        if (n > cfg.contact_cap) continue;
        auto ks = parallel_map<double>(static_cast<std::size_t>(seeds), mc.workers, [&](std::size_t s) {
          return detail::quenched_ks(contact_law(
              log_partition(law, h, mc.sample(static_cast<int>(s), n), n, QuenchedSystem::Tables::prefix_only),
              cfg.contact_cap));
        });
        row(Quantity::ks_quenched, h, n, stats::mean(ks), seeds > 1 ? stats::stderr_of_mean(ks) : 0.0, seeds);
      }
    }
    if (on(Quantity::decay_gamma) || on(Quantity::decay_G)) {
      const auto opt = cfg.decay_options();
      if (opt.window + (opt.offsets - 1) * std::max(1, opt.window / 4) + 1 <= law.n_max()) {
        const auto d = correlation_decay_scan(mc, h, opt);
        if (!d.at_floor) {
          if (on(Quantity::decay_gamma)) row(Quantity::decay_gamma, h, opt.window, d.gamma_hat, d.gamma_stderr, S);
          if (on(Quantity::decay_G))
            row(Quantity::decay_G, h, opt.window, d.G_hat, d.G_hat * d.fit.intercept_stderr, S);
        }
        for (std::size_t j = 1; j < d.log_mean_a.size(); ++j)
          out.decay_csv += "avoidance," + io::format_real(h) + "," + std::to_string(j) + "," +
                           io::format_real(d.log_mean_a[j]) + "\n";
        for (std::size_t g = 0; g < d.mixing_proxy.size(); ++g)
          out.decay_csv += "mixing," + io::format_real(h) + "," + std::to_string(static_cast<int>(d.mixing_gap[g])) +
                           "," + io::format_real(d.mixing_proxy[g] > 0 ? std::log(d.mixing_proxy[g])
                                                                       : -std::numeric_limits<double>::infinity()) +
                           "\n";
      }
    }
    if (on(Quantity::conc_kappa) && S >= 500) {
      const auto u = cfg.u_grid.empty() ? default_u_grid(N) : cfg.u_grid;
      const auto c = concentration_scan(mc, h, N, u);
      row(Quantity::conc_kappa, h, N, c.free_energy.kappa_linear, 0.0, S);
    }
  }
  return out;
}

// -- report ---------------------------------------------------------------------

inline int make_plots(const fs::path& dir, std::ostream& out) {
  int written = 0;
  const auto plots = dir / "plots";
  if (fs::exists(dir / "series.csv")) {
    const auto rows = io::parse_series_csv(io::read_file(dir / "series.csv"), (dir / "series.csv").string());
    std::map<std::string, std::map<double, io::PlotSeries>> by_n;  // quantity -> h -> series over n
    std::map<std::string, std::map<int, io::PlotSeries>> by_h;     // quantity -> n -> series over h
    for (const auto& r : rows) {
      auto& s = by_n[r.quantity][r.h];
      s.label = "h=" + io::short_real(r.h);
      s.x.push_back(r.n);
      s.y.push_back(r.value);
      auto& t = by_h[r.quantity][r.n];
      t.label = "n=" + std::to_string(r.n);
      t.x.push_back(r.h);
      t.y.push_back(r.value);
    }
    for (const auto& [q, m] : by_n) {
      io::Plot p{q + " vs n", "n", q, {}, true};
      for (const auto& [h, s] : m) p.series.push_back(s);
      io::atomic_write(plots / (q + "_vs_n.svg"), io::render_svg(p));
      ++written;
    }
    for (const auto& q : {"f", "mu"})
      if (by_h.count(q)) {
        io::Plot p{std::string(q) + " vs h", "h", q, {}, true};
        for (const auto& [n, s] : by_h[q]) p.series.push_back(s);
        io::atomic_write(plots / (std::string(q) + "_vs_h.svg"), io::render_svg(p));
        ++written;
      }
  }
  if (fs::exists(dir / "decay.csv")) {
    std::istringstream is(io::read_file(dir / "decay.csv"));
    std::string line;
    std::getline(is, line);
    std::map<std::string, std::map<double, io::PlotSeries>> curves;
    while (std::getline(is, line)) {
      const auto f = io::split(line, ',');
      if (f.size() != 4) continue;
      const double h = io::parse_real(f[1]);
      auto& s = curves[f[0]][h];
      s.label = "h=" + io::short_real(h);
      s.x.push_back(std::stod(f[2]));
      s.y.push_back(io::parse_real(f[3]));
    }
    for (const auto& [name, m] : curves) {
      io::Plot p{name == "avoidance" ? "log mean a_j vs j" : "log mixing proxy vs gap", name == "avoidance" ? "j" : "gap",
                 "log value", {}, false};
      for (const auto& [h, s] : m) p.series.push_back(s);
      io::atomic_write(plots / (name + ".svg"), io::render_svg(p));
      ++written;
    }
  }
  if (fs::exists(dir / "report.json")) {
    const auto reps = io::parse_report_json(io::read_file(dir / "report.json"));
    for (const auto& r : reps) {
      out << to_string(r.id) << " " << to_string(r.status);
      if (r.status == CheckStatus::skipped) out << " (" << r.skip_reason << ")";
      out << "  " << r.result << "\n";
    }
  }
  return written;
}

// -- entry point ----------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Numerical laboratory for the disordered pinning model", "pinlab"};
  app.require_subcommand(1);
  Flags flags;
  auto add_flags = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "YAML configuration file");
    sub->add_option("--seed", flags.seed, "master seed override");
    sub->add_option("--out", flags.out, "output directory (default: run.output, then $PINLAB_OUT)");
    sub->add_option("--checks", flags.checks, "comma-separated check ids, e.g. C4,C7");
    sub->add_option("--threads", flags.threads, "worker threads; never changes results");
  };
  auto* compute = app.add_subcommand("compute", "exact observables of one disorder realization");
  auto* scan_cmd = app.add_subcommand("scan", "Monte Carlo estimate series over the grids");
  auto* verify = app.add_subcommand("verify", "run the checks and write report.json");
  auto* report = app.add_subcommand("report", "plot and summarize the outputs of earlier runs");
  for (auto* s : {compute, scan_cmd, verify, report}) add_flags(s);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "pinlab: " << e.what() << "\n";
    return kExitError;
  }

  try {
    const RunConfig cfg = resolve(flags);
    const fs::path dir = output_dir(cfg, flags);
    if (report->parsed()) {
      const int n = make_plots(dir, out);
      out << "wrote " << n << " plot(s) to " << (dir / "plots").string() << "\n";
      return kExitOk;
    }
    const auto law = cfg.model.build();
    if (compute->parsed()) {
      const auto rows = compute_rows(cfg, law);
      io::atomic_write(dir / "series.csv", io::series_csv(rows));
      write_common(dir, cfg);
      for (const auto& r : rows)
        out << r.quantity << " h=" << io::format_real(r.h) << " n=" << r.n << " " << io::format_real(r.value) << "\n";
      return kExitOk;
    }
    if (scan_cmd->parsed()) {
      const auto s = scan(cfg, law);
      io::atomic_write(dir / "series.csv", io::series_csv(s.series));
      io::atomic_write(dir / "decay.csv", s.decay_csv);
      write_common(dir, cfg);
      out << "wrote " << s.series.size() << " series rows to " << dir.string() << "\n";
      return kExitOk;
    }
    const auto reports = full_report(cfg.check_config(law), cfg.check_ids());
    io::atomic_write(dir / "report.json", io::report_json(reports));
    write_common(dir, cfg);
    bool failed = false;
    for (const auto& r : reports) {
      out << to_string(r.id) << " " << to_string(r.status);
      if (r.status == CheckStatus::skipped) out << " (" << r.skip_reason << ")";
      out << "\n";
      if (r.status == CheckStatus::failed) failed = true;
    }
    return failed ? kExitCheckFailed : kExitOk;
  } catch (const config_error& e) {
    err << "pinlab: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "pinlab: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace pinlab::cli
