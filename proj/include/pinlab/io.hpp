#pragma once

// Output files: atomic writes, series CSV, report JSON, SVG line plots.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "pinlab/theorems.hpp"

namespace pinlab::io {

namespace fs = std::filesystem;

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that reads back to the same double.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_real(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw io_error("not a number: '" + s + "'");
  return v;
}

/// Writes `content` to a temporary sibling and renames it over `path`.
inline void atomic_write(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw io_error(path.parent_path().string() + ": " + ec.message());
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error(tmp.string() + ": cannot open for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw io_error(tmp.string() + ": write failed");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignore;
    fs::remove(tmp, ignore);
    throw io_error(path.string() + ": " + ec.message());
  }
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error(path.string() + ": cannot open for reading");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// -- series.csv ---------------------------------------------------------------

struct SeriesRow {
  std::string quantity;
  double h = 0.0;
  int n = 0;
  double value = 0.0;
  double stderr = 0.0;
  int samples = 0;
  friend bool operator==(const SeriesRow&, const SeriesRow&) = default;
};

inline constexpr const char* kSeriesHeader = "quantity,h,n,value,stderr,samples";

inline std::string series_csv(const std::vector<SeriesRow>& rows) {
  std::string out = std::string(kSeriesHeader) + "\n";
  for (const auto& r : rows)
    out += r.quantity + "," + format_real(r.h) + "," + std::to_string(r.n) + "," + format_real(r.value) + "," +
           format_real(r.stderr) + "," + std::to_string(r.samples) + "\n";
  return out;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline std::vector<SeriesRow> parse_series_csv(const std::string& text, const std::string& source = "series.csv") {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kSeriesHeader) throw io_error(source + ": missing header");
  std::vector<SeriesRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) throw io_error(source + ":" + std::to_string(lineno) + ": expected 6 columns");
    try {
      rows.push_back({f[0], parse_real(f[1]), std::stoi(f[2]), parse_real(f[3]), parse_real(f[4]), std::stoi(f[5])});
    } catch (const std::exception& e) {
      throw io_error(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

// -- report.json --------------------------------------------------------------

using nlohmann::ordered_json;

inline ordered_json real_json(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

inline double real_from_json(const ordered_json& j) {
  if (j.is_string()) return parse_real(j.get<std::string>());
  return j.get<double>();
}

inline ordered_json to_json(const CheckReport& r) {
  ordered_json j;
  j["check_id"] = to_string(r.id);
  j["result"] = r.result;
  j["status"] = to_string(r.status);
  j["passed"] = r.passed();
  if (r.status == CheckStatus::skipped) j["skip_reason"] = r.skip_reason;
  j["parameters"] = ordered_json::object();
  for (const auto& [k, v] : r.parameters) j["parameters"][k] = v;
  j["metrics"] = ordered_json::object();
  for (const auto& [k, v] : r.metrics) j["metrics"][k] = real_json(v);
  j["fitted_constants"] = ordered_json::array();
  for (const auto& c : r.fitted)
    j["fitted_constants"].push_back({{"name", c.name}, {"value", real_json(c.value)}, {"stderr", real_json(c.stderr)}});
  j["tolerance_spec"] = ordered_json::object();
  for (const auto& [k, v] : r.tolerances) j["tolerance_spec"][k] = real_json(v);
  j["clauses"] = ordered_json::array();
  for (const auto& c : r.clauses)
    j["clauses"].push_back({{"name", c.name},
                            {"status", c.applicable ? (c.holds ? "passed" : "failed") : "not_applicable"},
                            {"note", c.note}});
  return j;
}

inline CheckReport report_from_json(const ordered_json& j) {
  CheckReport r;
  r.id = check_id_from_string(j.at("check_id").get<std::string>());
  r.result = j.at("result").get<std::string>();
  const auto st = j.at("status").get<std::string>();
  r.status = st == "passed" ? CheckStatus::passed : st == "skipped" ? CheckStatus::skipped : CheckStatus::failed;
  if (j.contains("skip_reason")) r.skip_reason = j["skip_reason"].get<std::string>();
  for (const auto& [k, v] : j.at("parameters").items()) r.parameters.emplace_back(k, v.get<std::string>());
  for (const auto& [k, v] : j.at("metrics").items()) r.metrics.emplace_back(k, real_from_json(v));
  for (const auto& c : j.at("fitted_constants"))
    r.fitted.push_back({c.at("name").get<std::string>(), real_from_json(c.at("value")), real_from_json(c.at("stderr"))});
  for (const auto& [k, v] : j.at("tolerance_spec").items()) r.tolerances.emplace_back(k, real_from_json(v));
  for (const auto& c : j.at("clauses")) {
    const auto s = c.at("status").get<std::string>();
    r.clauses.push_back({c.at("name").get<std::string>(), s != "not_applicable", s == "passed",
                         c.at("note").get<std::string>()});
  }
  return r;
}

inline std::string report_json(const std::vector<CheckReport>& reports) {
  ordered_json j;
  j["mapping"] = ordered_json::object();
  for (const auto& [id, result] : check_mapping()) j["mapping"][id] = result;
  j["reports"] = ordered_json::array();
  for (const auto& r : reports) j["reports"].push_back(to_json(r));
  return j.dump(2) + "\n";
}

inline std::vector<CheckReport> parse_report_json(const std::string& text) {
  const auto j = ordered_json::parse(text);
  std::vector<CheckReport> out;
  for (const auto& r : j.at("reports")) out.push_back(report_from_json(r));
  return out;
}

inline std::string seeds_json(std::uint64_t master_seed) {
  ordered_json j;
  j["master_seed"] = master_seed;
  j["scheme"] = "splitmix64-counter-v1";
  j["derivation"] = "sample s uses stream s of the counter generator keyed by master_seed; omega_a is draw a";
  return j.dump(2) + "\n";
}

// -- SVG ------------------------------------------------------------------------

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

struct Plot {
  std::string title, x_label, y_label;
  std::vector<PlotSeries> series;
  bool markers = true;
};

inline std::string svg_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

inline std::string short_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

/// Line plot with axes and min/max tick labels; non-finite points are dropped.
inline std::string render_svg(const Plot& p) {
  constexpr double W = 640, H = 420, L = 70, R = 160, T = 40, B = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : p.series)
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
        x0 = std::min(x0, s.x[i]);
        x1 = std::max(x1, s.x[i]);
        y0 = std::min(y0, s.y[i]);
        y1 = std::max(y1, s.y[i]);
      }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto X = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto Y = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << svg_escape(p.title) << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  o << "<text x=\"" << L << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << short_real(x0) << "</text>\n";
  o << "<text x=\"" << W - R << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << short_real(x1) << "</text>\n";
  o << "<text x=\"" << L - 6 << "\" y=\"" << H - B << "\" text-anchor=\"end\">" << short_real(y0) << "</text>\n";
  o << "<text x=\"" << L - 6 << "\" y=\"" << T + 4 << "\" text-anchor=\"end\">" << short_real(y1) << "</text>\n";
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << svg_escape(p.x_label) << "</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (T + H - B) / 2
    << ")\">" << svg_escape(p.y_label) << "</text>\n";
  for (std::size_t k = 0; k < p.series.size(); ++k) {
    const auto& s = p.series[k];
    const char* col = colors[k % 8];
    o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      o << (first ? "" : " ") << short_real(X(s.x[i])) << "," << short_real(Y(s.y[i]));
      first = false;
    }
    o << "\"/>\n";
    if (p.markers)
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
          o << "<circle cx=\"" << short_real(X(s.x[i])) << "\" cy=\"" << short_real(Y(s.y[i])) << "\" r=\"2.5\" fill=\""
            << col << "\"/>\n";
    o << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (k + 1) << "\" fill=\"" << col << "\">" << svg_escape(s.label)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace pinlab::io
