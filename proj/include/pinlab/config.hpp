#pragma once

// Run configuration: YAML with blocks model, disorder, grids, run, checks.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "pinlab/disorder_mc.hpp"
#include "pinlab/model.hpp"
#include "pinlab/theorems.hpp"

namespace pinlab {

/// Invalid configuration; the message carries "file:line:column: ".
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LawSpec {
  enum class Kind { regular, geometric, table };
  Kind kind = Kind::regular;
  double alpha = 1.0;
  EllSpec ell = EllConstant{1.0};
  int n_max = 4096;
  bool normalize = true;
  double ratio = 0.5;
  double mass = 1.0;
  /// p(1), p(2), ... for the table kind.
  std::vector<double> p;

  int horizon() const { return kind == Kind::table ? static_cast<int>(p.size()) : n_max; }

  InterArrivalLaw build() const {
    switch (kind) {
      case Kind::regular: return build_law(alpha, ell, n_max, normalize);
      case Kind::geometric: return geometric_law(ratio, n_max, mass);
      case Kind::table: {
        std::vector<double> lp;
        for (double v : p) lp.push_back(std::log(v));
        return InterArrivalLaw::from_table(std::move(lp));
      }
    }
    throw std::logic_error("LawSpec: bad kind");
  }
  friend bool operator==(const LawSpec&, const LawSpec&) = default;
};

inline const char* to_string(LawSpec::Kind k) {
  switch (k) {
    case LawSpec::Kind::regular: return "regular";
    case LawSpec::Kind::geometric: return "geometric";
    case LawSpec::Kind::table: return "table";
  }
  return "?";
}

struct RunConfig {
  LawSpec model;
  DisorderLaw disorder;

  // grids
  std::vector<double> h_values{3.0};
  std::vector<int> n_values{128, 256, 512};
  std::vector<double> u_grid;
  int window = 96;
  int r_max = 6;
  int decay_fit_lo = 8;
  int decay_fit_hi = 64;
  int decay_offsets = 4;
  int mixing_gaps = 40;

  // run
  int samples = 100;
  std::uint64_t master_seed = 1;
  double h = 3.0;
  int sample_index = 0;
  int jet_order = static_cast<int>(kDefaultJetOrder);
  std::vector<std::string> quantities;
  /// Execution settings; never part of the resolved config.
  std::string output;
  int threads = 1;

  // checks
  std::vector<std::string> select;
  int seeds = 5;
  int hl_seeds = 10;
  int inequality_samples = 20;
  int oracle_instances = 200;
  int oracle_n_max = 10;
  int contact_cap = kDefaultContactLawCap;
  double ks_quenched_max = 0.06;
  double ks_centering_max = 0.05;
  double excursion_eps = 0.25;
  double excursion_mass = 0.9;
  double decay_r2_min = 0.98;
  double delta_fraction = 0.5;
  double factorization_tol = 1e-12;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  McConfig mc_config(const InterArrivalLaw& law) const {
    McConfig c;
    c.law = law;
    c.disorder = disorder;
    c.h_values = h_values;
    c.n_values = n_values;
    c.samples = samples;
    c.master_seed = master_seed;
    c.jet_order = static_cast<std::size_t>(jet_order);
    c.window = window;
    c.workers = threads;
    return c;
  }

  DecayOptions decay_options() const {
    DecayOptions d;
    d.window = window;
    d.offsets = decay_offsets;
    d.fit_lo = decay_fit_lo;
    d.fit_hi = decay_fit_hi;
    d.max_gap = mixing_gaps;
    return d;
  }

  CheckConfig check_config(const InterArrivalLaw& law) const {
    CheckConfig c;
    c.mc = mc_config(law);
    c.h = h;
    c.u_grid = u_grid;
    c.r_max = r_max;
    c.seeds = seeds;
    c.hl_seeds = hl_seeds;
    c.inequality_samples = inequality_samples;
    c.oracle_instances = oracle_instances;
    c.oracle_n_max = oracle_n_max;
    c.contact_cap = contact_cap;
    c.decay = decay_options();
    c.ks_quenched_max = ks_quenched_max;
    c.ks_centering_max = ks_centering_max;
    c.excursion_eps = excursion_eps;
    c.excursion_mass = excursion_mass;
    c.decay_r2_min = decay_r2_min;
    c.delta_fraction = delta_fraction;
    c.factorization_tol = factorization_tol;
    return c;
  }

  std::vector<CheckId> check_ids() const {
    std::vector<CheckId> ids;
    for (const auto& s : select) ids.push_back(check_id_from_string(s));
    return ids;
  }
};

namespace detail {

class ConfigReader {
 public:
  explicit ConfigReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Mark& m, const std::string& msg) const {
    std::ostringstream os;
    os << source_;
    if (!m.is_null()) os << ":" << m.line + 1 << ":" << m.column + 1;
    os << ": " << msg;
    throw config_error(os.str());
  }

  template <class T>
  T as(const YAML::Node& node, const std::string& key, const char* what) const {
    if (!node.IsScalar()) fail(node.Mark(), "'" + key + "' must be " + what);
    try {
      return node.as<T>();
    } catch (const YAML::BadConversion&) {
      fail(node.Mark(), "'" + key + "' must be " + what);
    }
  }

  template <class T>
  std::vector<T> list(const YAML::Node& node, const std::string& key, const char* what) const {
    if (!node.IsSequence()) fail(node.Mark(), "'" + key + "' must be a list of " + what);
    std::vector<T> out;
    for (const auto& e : node) out.push_back(as<T>(e, key, what));
    return out;
  }

  double real(const YAML::Node& n, const std::string& key) const {
    const double v = as<double>(n, key, "a number");
    if (!std::isfinite(v)) fail(n.Mark(), "'" + key + "' must be finite");
    return v;
  }
  int integer(const YAML::Node& n, const std::string& key, int lo) const {
    const int v = as<int>(n, key, "an integer");
    if (v < lo) fail(n.Mark(), "'" + key + "' must be >= " + std::to_string(lo));
    return v;
  }
  double positive(const YAML::Node& n, const std::string& key) const {
    const double v = real(n, key);
    if (!(v > 0.0)) fail(n.Mark(), "'" + key + "' must be positive");
    return v;
  }

  /// Calls fn(key, value) for each entry, rejecting keys not in `allowed`.
  template <class Fn>
  void each(const YAML::Node& block, const std::string& name, const std::set<std::string>& allowed, Fn&& fn) const {
    if (!block.IsMap()) fail(block.Mark(), "'" + name + "' must be a mapping");
    for (const auto& kv : block) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first.Mark(), "unknown key '" + key + "' in '" + name + "'");
      marks_[name + "." + key] = kv.second.Mark();
      fn(key, kv.second);
    }
  }

  YAML::Mark mark(const std::string& path) const {
    auto it = marks_.find(path);
    return it == marks_.end() ? YAML::Mark::null_mark() : it->second;
  }

 private:
  std::string source_;
  mutable std::map<std::string, YAML::Mark> marks_;
};

}  // namespace detail

inline RunConfig parse_config(const std::string& text, const std::string& source = "<config>") {
  detail::ConfigReader rd(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    rd.fail(e.mark, e.msg);
  }
  RunConfig c;
  if (root.IsNull()) return c;
  if (!root.IsMap()) rd.fail(root.Mark(), "the configuration must be a mapping");
  rd.each(root, "config", {"model", "disorder", "grids", "run", "checks"}, [](const auto&, const auto&) {});

  if (auto m = root["model"]) {
    bool kind_set = false;
    rd.each(m, "model", {"kind", "alpha", "ell", "n_max", "normalize", "ratio", "mass", "p"},
            [&](const std::string& k, const YAML::Node& v) {
              if (k == "kind") {
                const auto s = rd.as<std::string>(v, k, "a string");
                if (s == "regular") c.model.kind = LawSpec::Kind::regular;
                else if (s == "geometric") c.model.kind = LawSpec::Kind::geometric;
                else if (s == "table") c.model.kind = LawSpec::Kind::table;
                else rd.fail(v.Mark(), "unknown model kind '" + s + "' (regular, geometric, table)");
                kind_set = true;
              } else if (k == "alpha") {
                c.model.alpha = rd.real(v, k);
                if (c.model.alpha < 1.0) rd.fail(v.Mark(), "'alpha' must be >= 1");
              } else if (k == "n_max") {
                c.model.n_max = rd.integer(v, k, 2);
              } else if (k == "normalize") {
                c.model.normalize = rd.as<bool>(v, k, "a boolean");
              } else if (k == "ratio") {
                c.model.ratio = rd.real(v, k);
                if (!(c.model.ratio > 0.0 && c.model.ratio < 1.0)) rd.fail(v.Mark(), "'ratio' must lie in (0, 1)");
              } else if (k == "mass") {
                c.model.mass = rd.positive(v, k);
                if (c.model.mass > 1.0) rd.fail(v.Mark(), "'mass' must be <= 1");
              } else if (k == "p") {
                c.model.p = rd.list<double>(v, k, "numbers");
                if (c.model.p.empty()) rd.fail(v.Mark(), "'p' must be nonempty");
                for (double x : c.model.p)
                  if (!(x > 0.0 && std::isfinite(x))) rd.fail(v.Mark(), "'p' entries must be positive");
              } else if (k == "ell") {
                std::string form = "constant";
                double cc = 1.0, beta = 0.0;
                rd.each(v, "model.ell", {"form", "c", "beta"}, [&](const std::string& kk, const YAML::Node& vv) {
                  if (kk == "form") form = rd.as<std::string>(vv, kk, "a string");
                  if (kk == "c") cc = rd.positive(vv, kk);
                  if (kk == "beta") beta = rd.real(vv, kk);
                });
                if (form == "constant") {
                  if (beta != 0.0) rd.fail(v.Mark(), "'beta' requires form log_power");
                  c.model.ell = EllConstant{cc};
                } else if (form == "log_power") {
                  c.model.ell = EllLogPower{cc, beta};
                } else {
                  rd.fail(rd.mark("model.ell.form"), "unknown ell form '" + form + "' (constant, log_power)");
                }
              }
            });
    if (c.model.kind == LawSpec::Kind::table && c.model.p.empty())
      rd.fail(kind_set ? rd.mark("model.kind") : m.Mark(), "model kind table needs 'p'");
  }

  if (auto d = root["disorder"]) {
    bool param_set = false;
    rd.each(d, "disorder", {"family", "param"}, [&](const std::string& k, const YAML::Node& v) {
      if (k == "family") {
        try {
          c.disorder.family = disorder_family_from_string(rd.as<std::string>(v, k, "a string"));
        } catch (const std::invalid_argument& e) {
          rd.fail(v.Mark(), e.what());
        }
      } else {
        c.disorder.param = rd.real(v, k);
        if (c.disorder.param < 0.0) rd.fail(v.Mark(), "'param' must be >= 0");
        param_set = true;
      }
    });
    if (c.disorder.family != DisorderFamily::zero && !param_set) rd.fail(d.Mark(), "disorder family needs 'param'");
    if (c.disorder.family == DisorderFamily::zero) c.disorder.param = 0.0;
    if (c.disorder.family == DisorderFamily::shifted_exponential && !(c.disorder.param > 0.0))
      rd.fail(rd.mark("disorder.param"), "shifted_exponential needs param > 0");
  }

  if (auto g = root["grids"]) {
    rd.each(g, "grids",
            {"h_values", "n_values", "u_grid", "window", "r_max", "decay_fit", "decay_offsets", "mixing_gaps"},
            [&](const std::string& k, const YAML::Node& v) {
              if (k == "h_values") {
                c.h_values = rd.list<double>(v, k, "numbers");
                if (c.h_values.empty()) rd.fail(v.Mark(), "'h_values' must be nonempty");
                if (!std::is_sorted(c.h_values.begin(), c.h_values.end()))
                  rd.fail(v.Mark(), "'h_values' must be sorted");
              } else if (k == "n_values") {
                c.n_values = rd.list<int>(v, k, "integers");
                if (c.n_values.empty()) rd.fail(v.Mark(), "'n_values' must be nonempty");
                if (c.n_values.front() < 1 || std::adjacent_find(c.n_values.begin(), c.n_values.end(),
                                                                 [](int a, int b) { return a >= b; }) !=
                                                      c.n_values.end())
                  rd.fail(v.Mark(), "'n_values' must be positive and strictly increasing");
              } else if (k == "u_grid") {
                c.u_grid = rd.list<double>(v, k, "numbers");
                for (double u : c.u_grid)
                  if (!(u >= 0.0)) rd.fail(v.Mark(), "'u_grid' entries must be >= 0");
              } else if (k == "window") {
                c.window = rd.integer(v, k, 16);
              } else if (k == "r_max") {
                c.r_max = rd.integer(v, k, 1);
              } else if (k == "decay_fit") {
                const auto f = rd.list<int>(v, k, "integers");
                if (f.size() != 2 || f[0] < 1 || f[0] >= f[1]) rd.fail(v.Mark(), "'decay_fit' must be [lo, hi] with 1 <= lo < hi");
                c.decay_fit_lo = f[0];
                c.decay_fit_hi = f[1];
              } else if (k == "decay_offsets") {
                c.decay_offsets = rd.integer(v, k, 1);
              } else if (k == "mixing_gaps") {
                c.mixing_gaps = rd.integer(v, k, 3);
              }
            });
  }

  if (auto r = root["run"]) {
    rd.each(r, "run", {"samples", "master_seed", "h", "sample_index", "jet_order", "quantities", "output", "threads"},
            [&](const std::string& k, const YAML::Node& v) {
              if (k == "samples") c.samples = rd.integer(v, k, 2);
              else if (k == "master_seed") c.master_seed = rd.as<std::uint64_t>(v, k, "an unsigned 64-bit integer");
              else if (k == "h") c.h = rd.real(v, k);
              else if (k == "sample_index") c.sample_index = rd.integer(v, k, 0);
              else if (k == "jet_order") c.jet_order = rd.integer(v, k, 2);
              else if (k == "quantities") c.quantities = rd.list<std::string>(v, k, "names");
              else if (k == "output") c.output = rd.as<std::string>(v, k, "a path");
              else if (k == "threads") c.threads = rd.integer(v, k, 1);
            });
  }

  if (auto ch = root["checks"]) {
    rd.each(ch, "checks",
            {"select", "seeds", "hl_seeds", "inequality_samples", "oracle_instances", "oracle_n_max", "contact_cap",
             "ks_quenched_max", "ks_centering_max", "excursion_eps", "excursion_mass", "decay_r2_min",
             "delta_fraction", "factorization_tol"},
            [&](const std::string& k, const YAML::Node& v) {
              if (k == "select") {
                c.select = rd.list<std::string>(v, k, "check ids");
                for (const auto& s : c.select) {
                  try {
                    check_id_from_string(s);
                  } catch (const std::invalid_argument& e) {
                    rd.fail(v.Mark(), e.what());
                  }
                }
              } else if (k == "seeds") c.seeds = rd.integer(v, k, 1);
              else if (k == "hl_seeds") c.hl_seeds = rd.integer(v, k, 1);
              else if (k == "inequality_samples") c.inequality_samples = rd.integer(v, k, 1);
              else if (k == "oracle_instances") c.oracle_instances = rd.integer(v, k, 1);
              else if (k == "oracle_n_max") {
                c.oracle_n_max = rd.integer(v, k, 2);
                if (c.oracle_n_max > oracle::kMaxOracleSize) rd.fail(v.Mark(), "'oracle_n_max' must be <= 16");
              } else if (k == "contact_cap") c.contact_cap = rd.integer(v, k, 1);
              else if (k == "ks_quenched_max") c.ks_quenched_max = rd.positive(v, k);
              else if (k == "ks_centering_max") c.ks_centering_max = rd.positive(v, k);
              else if (k == "excursion_eps") c.excursion_eps = rd.positive(v, k);
              else if (k == "excursion_mass") c.excursion_mass = rd.positive(v, k);
              else if (k == "decay_r2_min") c.decay_r2_min = rd.positive(v, k);
              else if (k == "delta_fraction") c.delta_fraction = rd.positive(v, k);
              else if (k == "factorization_tol") c.factorization_tol = rd.positive(v, k);
            });
  }

  // cross-field checks
  const int horizon = c.model.horizon();
  if (c.n_values.back() > horizon)
    rd.fail(rd.mark("grids.n_values"), "n = " + std::to_string(c.n_values.back()) + " exceeds the law horizon " +
                                           std::to_string(horizon));
  if (c.decay_fit_hi > c.window) rd.fail(rd.mark("grids.decay_fit"), "'decay_fit' upper end exceeds the window");
  if (c.r_max > c.jet_order) rd.fail(rd.mark("grids.r_max"), "'r_max' exceeds run.jet_order");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error(path + ": cannot open configuration file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

/// Fully resolved YAML. Execution settings (output, threads) are included
/// only on request, so the resolved file does not depend on them.
inline std::string to_yaml(const RunConfig& c, bool with_execution = false) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << to_string(c.model.kind);
  switch (c.model.kind) {
    case LawSpec::Kind::regular:
      e << YAML::Key << "alpha" << YAML::Value << c.model.alpha;
      e << YAML::Key << "ell" << YAML::Value << YAML::BeginMap;
      if (const auto* k = std::get_if<EllConstant>(&c.model.ell)) {
        e << YAML::Key << "form" << YAML::Value << "constant" << YAML::Key << "c" << YAML::Value << k->c;
      } else {
        const auto& lp = std::get<EllLogPower>(c.model.ell);
        e << YAML::Key << "form" << YAML::Value << "log_power" << YAML::Key << "c" << YAML::Value << lp.c
          << YAML::Key << "beta" << YAML::Value << lp.beta;
      }
      e << YAML::EndMap;
      e << YAML::Key << "n_max" << YAML::Value << c.model.n_max;
      e << YAML::Key << "normalize" << YAML::Value << c.model.normalize;
      break;
    case LawSpec::Kind::geometric:
      e << YAML::Key << "ratio" << YAML::Value << c.model.ratio;
      e << YAML::Key << "mass" << YAML::Value << c.model.mass;
      e << YAML::Key << "n_max" << YAML::Value << c.model.n_max;
      break;
    case LawSpec::Kind::table:
      e << YAML::Key << "p" << YAML::Value << YAML::Flow << c.model.p;
      break;
  }
  e << YAML::EndMap;

  e << YAML::Key << "disorder" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "family" << YAML::Value << to_string(c.disorder.family);
  e << YAML::Key << "param" << YAML::Value << c.disorder.param;
  e << YAML::EndMap;

  e << YAML::Key << "grids" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "h_values" << YAML::Value << YAML::Flow << c.h_values;
  e << YAML::Key << "n_values" << YAML::Value << YAML::Flow << c.n_values;
  e << YAML::Key << "u_grid" << YAML::Value << YAML::Flow << c.u_grid;
  e << YAML::Key << "window" << YAML::Value << c.window;
  e << YAML::Key << "r_max" << YAML::Value << c.r_max;
  e << YAML::Key << "decay_fit" << YAML::Value << YAML::Flow << std::vector<int>{c.decay_fit_lo, c.decay_fit_hi};
  e << YAML::Key << "decay_offsets" << YAML::Value << c.decay_offsets;
  e << YAML::Key << "mixing_gaps" << YAML::Value << c.mixing_gaps;
  e << YAML::EndMap;

  e << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "samples" << YAML::Value << c.samples;
  e << YAML::Key << "master_seed" << YAML::Value << c.master_seed;
  e << YAML::Key << "h" << YAML::Value << c.h;
  e << YAML::Key << "sample_index" << YAML::Value << c.sample_index;
  e << YAML::Key << "jet_order" << YAML::Value << c.jet_order;
  e << YAML::Key << "quantities" << YAML::Value << YAML::Flow << c.quantities;
  if (with_execution) {
    e << YAML::Key << "output" << YAML::Value << c.output;
    e << YAML::Key << "threads" << YAML::Value << c.threads;
  }
  e << YAML::EndMap;

  e << YAML::Key << "checks" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "select" << YAML::Value << YAML::Flow << c.select;
  e << YAML::Key << "seeds" << YAML::Value << c.seeds;
  e << YAML::Key << "hl_seeds" << YAML::Value << c.hl_seeds;
  e << YAML::Key << "inequality_samples" << YAML::Value << c.inequality_samples;
  e << YAML::Key << "oracle_instances" << YAML::Value << c.oracle_instances;
  e << YAML::Key << "oracle_n_max" << YAML::Value << c.oracle_n_max;
  e << YAML::Key << "contact_cap" << YAML::Value << c.contact_cap;
  e << YAML::Key << "ks_quenched_max" << YAML::Value << c.ks_quenched_max;
  e << YAML::Key << "ks_centering_max" << YAML::Value << c.ks_centering_max;
  e << YAML::Key << "excursion_eps" << YAML::Value << c.excursion_eps;
  e << YAML::Key << "excursion_mass" << YAML::Value << c.excursion_mass;
  e << YAML::Key << "decay_r2_min" << YAML::Value << c.decay_r2_min;
  e << YAML::Key << "delta_fraction" << YAML::Value << c.delta_fraction;
  e << YAML::Key << "factorization_tol" << YAML::Value << c.factorization_tol;
  e << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace pinlab
