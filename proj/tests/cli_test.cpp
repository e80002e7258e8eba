#include "pinlab/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

namespace pinlab {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("pinlab_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write(const fs::path& p, const std::string& text) {
  io::atomic_write(p, text);
  return p;
}

int run(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  std::ostringstream o, e;
  const int rc = cli::run(args, o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return rc;
}

const char* kToy = R"(model:
  kind: table
  p: [0.5, 0.25]
disorder:
  family: zero
grids:
  h_values: [0.0]
  n_values: [2]
)";

const char* kSmall = R"(model:
  kind: regular
  alpha: 1.0
  n_max: 512
disorder:
  family: gaussian
  param: 1.0
grids:
  h_values: [2.0, 3.0]
  n_values: [32, 64, 128]
  window: 24
  decay_fit: [3, 16]
  mixing_gaps: 10
run:
  samples: 12
  master_seed: 9
checks:
  seeds: 2
  hl_seeds: 2
  oracle_instances: 10
  oracle_n_max: 6
  inequality_samples: 2
)";

TEST(Config, DefaultsWhenEmpty) {
  const auto c = parse_config("");
  EXPECT_EQ(c, RunConfig{});
}

TEST(Config, RoundTripsThroughYaml) {
  auto c = parse_config(kSmall);
  c.model.ell = EllLogPower{0.7, 1.5};
  c.h_values = {0.1, 1.0 / 3.0, 2.5};
  c.u_grid = {0.0, 1.25};
  c.select = {"C4", "C7"};
  c.quantities = {"f", "mu"};
  c.output = "somewhere";
  c.threads = 3;
  EXPECT_EQ(parse_config(to_yaml(c, true)), c);
  auto without = parse_config(to_yaml(c));
  EXPECT_EQ(without.threads, 1);
  EXPECT_TRUE(without.output.empty());
  without.threads = 3;
  without.output = "somewhere";
  EXPECT_EQ(without, c);
}

TEST(Config, ErrorsCarryLineAndColumn) {
  auto expect_error = [](const std::string& text, const std::string& where) {
    try {
      parse_config(text, "cfg.yaml");
      ADD_FAILURE() << "no error for: " << text;
    } catch (const config_error& e) {
      EXPECT_EQ(std::string(e.what()).rfind("cfg.yaml:" + where + ":", 0), 0U) << e.what();
    }
  };
  expect_error("model:\n  kind: tabel\n", "2:9");
  expect_error("model:\n  alpha: 0.5\n", "2:10");
  expect_error("run:\n  samples: 1\n", "2:12");
  expect_error("grids:\n  n_values: [64, 32]\n", "2:13");
  expect_error("grids:\n  n_values: [64, 100000]\n", "2:13");
  expect_error("disorder:\n  family: cauchy\n", "2:11");
  expect_error("run:\n  sample: 5\n", "2:3");
  expect_error("bogus: 1\n", "1:1");
  expect_error("model: [\n", "2:1");
  expect_error("checks:\n  select: [C99]\n", "2:11");
}

TEST(Io, FormatRealRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) EXPECT_EQ(io::parse_real(io::format_real(v)), v);
  EXPECT_EQ(io::format_real(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_TRUE(std::isnan(io::parse_real("nan")));
}

TEST(Io, EmptySeriesIsHeaded) {
  EXPECT_EQ(io::series_csv({}), "quantity,h,n,value,stderr,samples\n");
  EXPECT_TRUE(io::parse_series_csv(io::series_csv({})).empty());
}

TEST(Io, OneSeriesRowHasSixColumns) {
  const io::SeriesRow r{"f", 3.0, 256, 0.123456789012345678, 1e-3, 100};
  const auto text = io::series_csv({r});
  const auto line = text.substr(text.find('\n') + 1);
  EXPECT_EQ(io::split(line.substr(0, line.size() - 1), ',').size(), 6U);
  EXPECT_EQ(io::parse_series_csv(text), std::vector<io::SeriesRow>{r});
}

TEST(Io, ReportJsonRoundTrips) {
  CheckConfig c;
  c.mc.law = build_law(1.0, EllConstant{1.0}, 256, true);
  c.mc.disorder = DisorderLaw::gaussian(1.0);
  c.mc.n_values = {16, 32, 64};
  c.mc.samples = 6;
  c.oracle_instances = 5;
  c.oracle_n_max = 6;
  c.inequality_samples = 2;
  auto reps = full_report(c, {CheckId::C4, CheckId::C9, CheckId::C10, CheckId::C5});
  reps.push_back(skipped_report(CheckId::C12, "pure model"));
  reps[0].metrics.emplace_back("infinite", std::numeric_limits<double>::infinity());
  const auto back = io::parse_report_json(io::report_json(reps));
  ASSERT_EQ(back.size(), reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) EXPECT_EQ(back[i], reps[i]) << i;
}

TEST(Io, AtomicWriteLeavesNoTemporary) {
  const auto d = scratch("atomic");
  write(d / "a" / "b.txt", "hello");
  EXPECT_EQ(io::read_file(d / "a" / "b.txt"), "hello");
  EXPECT_FALSE(fs::exists(d / "a" / "b.txt.tmp"));
  EXPECT_THROW(io::atomic_write("/proc/definitely/not/writable.txt", "x"), io::io_error);
}

TEST(Io, SvgIsWellFormedAndSkipsNonFinite) {
  io::Plot p{"t", "x", "y", {{"s", {1, 2, 3}, {1.0, std::nan(""), 2.0}}}, true};
  const auto svg = io::render_svg(p);
  EXPECT_EQ(svg.rfind("<svg", 0), 0U);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
}

TEST(Cli, ComputeToy) {
  const auto d = scratch("toy");
  const auto cfg = write(d / "toy.yaml", kToy);
  ASSERT_EQ(run({"compute", "--config", cfg.string(), "--out", (d / "out").string()}), 0);
  const auto rows = io::parse_series_csv(io::read_file(d / "out" / "series.csv"));
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows[0].quantity, "log_z");
  EXPECT_NEAR(rows[0].value, -0.693147, 1e-6);
  EXPECT_TRUE(fs::exists(d / "out" / "seeds.json"));
  EXPECT_EQ(parse_config(io::read_file(d / "out" / "config.resolved.yaml")), parse_config(kToy));
}

TEST(Cli, InvalidConfigExitsOne) {
  const auto d = scratch("invalid");
  const auto cfg = write(d / "bad.yaml", "run:\n  samples: zero\n");
  std::string err;
  EXPECT_EQ(run({"scan", "--config", cfg.string(), "--out", (d / "o").string()}, nullptr, &err), 1);
  EXPECT_NE(err.find("bad.yaml:2:12"), std::string::npos) << err;
  EXPECT_EQ(run({"scan", "--config", (d / "missing.yaml").string()}), 1);
  EXPECT_EQ(run({"frobnicate"}), 1);
  EXPECT_EQ(run({"verify", "--config", cfg.string(), "--checks", "C77"}), 1);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const auto d = scratch("env");
  const auto cfg = write(d / "toy.yaml", kToy);
  ::setenv("PINLAB_OUT", (d / "from_env").c_str(), 1);
  EXPECT_EQ(run({"compute", "--config", cfg.string()}), 0);
  ::unsetenv("PINLAB_OUT");
  EXPECT_TRUE(fs::exists(d / "from_env" / "series.csv"));
}

TEST(Cli, VerifyPureModelSkipsCenteringCumulants) {
  const auto d = scratch("pure");
  std::string text = kSmall;
  text.replace(text.find("family: gaussian"), 16, "family: zero");
  const auto cfg = write(d / "pure.yaml", text);
  std::string out;
  EXPECT_EQ(run({"verify", "--config", cfg.string(), "--out", (d / "o").string(), "--checks", "C4,C10,C12"}, &out), 0);
  const auto reps = io::parse_report_json(io::read_file(d / "o" / "report.json"));
  ASSERT_EQ(reps.size(), 3U);
  EXPECT_FALSE(reps[0].clause("w_positive").applicable);
  EXPECT_EQ(reps[2].status, CheckStatus::skipped);
  EXPECT_EQ(reps[2].skip_reason, "pure model");
}

TEST(Cli, FailedCheckExitsTwoAndStillWritesReport) {
  const auto d = scratch("fail");
  std::string text = kSmall;
  text += "  excursion_mass: 1.5\n";
  const auto cfg = write(d / "c.yaml", text);
  EXPECT_EQ(run({"verify", "--config", cfg.string(), "--out", (d / "o").string(), "--checks", "C6"}), 2);
  EXPECT_TRUE(fs::exists(d / "o" / "report.json"));
}

TEST(Cli, ScanIsDeterministicAcrossThreadsAndReportPlots) {
  const auto d = scratch("scan");
  const auto cfg = write(d / "c.yaml", kSmall);
  ASSERT_EQ(run({"scan", "--config", cfg.string(), "--out", (d / "a").string(), "--threads", "1"}), 0);
  ASSERT_EQ(run({"scan", "--config", cfg.string(), "--out", (d / "b").string(), "--threads", "4"}), 0);
  for (const auto* f : {"series.csv", "decay.csv", "seeds.json", "config.resolved.yaml"})
    EXPECT_EQ(io::read_file(d / "a" / f), io::read_file(d / "b" / f)) << f;
  ASSERT_EQ(run({"scan", "--config", cfg.string(), "--out", (d / "c").string(), "--seed", "10"}), 0);
  EXPECT_NE(io::read_file(d / "a" / "series.csv"), io::read_file(d / "c" / "series.csv"));
  std::string out;
  ASSERT_EQ(run({"report", "--out", (d / "a").string()}, &out), 0);
  EXPECT_TRUE(fs::exists(d / "a" / "plots" / "avoidance.svg"));
  EXPECT_TRUE(fs::exists(d / "a" / "plots" / "f_vs_h.svg"));
  EXPECT_TRUE(fs::exists(d / "a" / "plots" / "ks_quenched_vs_n.svg"));
}

}  // namespace
}  // namespace pinlab
