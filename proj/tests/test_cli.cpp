#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <gtest/gtest.h>

#include <ridebot/sweep.hpp>
#include <ridebot/trajectory.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "svg.hpp"

namespace ridebot::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ridebot");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> parts;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string l;
  while (std::getline(ss, l)) out.push_back(l);
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir = fs::temp_directory_path() / (std::string("ridebot_cli_") + info->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir;
};

TEST(Config, DefaultsValidateAndRoundTrip) {
  RunConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  std::ostringstream first;
  write_config(first, cfg);
  RunConfig back;
  back.scheme = "baseline";
  back.segments = 11;
  std::istringstream is(first.str());
  apply_config(back, is);
  std::ostringstream second;
  write_config(second, back);
  EXPECT_EQ(first.str(), second.str());
}

TEST(Config, UnknownKeyIsNamedWithItsLine) {
  RunConfig cfg;
  std::istringstream is("[model]\nm_s = 4\n# comment\nmasss = 3\n");
  try {
    apply_config(cfg, is);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("masss"), std::string::npos) << what;
    EXPECT_NE(what.find("line 4"), std::string::npos) << what;
  }
}

TEST(Config, RejectsMalformedInput) {
  auto fails = [](const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    try {
      apply_config(cfg, is);
      cfg.validate();
    } catch (const ConfigError&) {
      return true;
    }
    return false;
  };
  EXPECT_TRUE(fails("[nosuch]\nx = 1\n"));
  EXPECT_TRUE(fails("m_s = 4\n"));
  EXPECT_TRUE(fails("[model]\nm_s = heavy\n"));
  EXPECT_TRUE(fails("[model]\nm_s\n"));
  EXPECT_TRUE(fails("[model]\nm_s = -4\n"));
  EXPECT_TRUE(fails("[scheme]\nname = hics9\n"));
  EXPECT_TRUE(fails("[scheme]\nnu = 1.5\n"));
  EXPECT_TRUE(fails("[optimization]\nsegments = 5\n"));
  EXPECT_TRUE(fails("[output]\nworkers = -1\n"));
  EXPECT_FALSE(fails("; leading comment\n[model]\n  m_s = 5 # inline\n"));
}

TEST(Config, SetsEveryDocumentedSection) {
  RunConfig cfg;
  std::istringstream is(
      "[model]\nb_phi = 0.2\n[gains]\nsource = manual\nk1 = -500\nk2 = -90\nk3 = -4\n"
      "[scheme]\nname = hics2\nnu = 0.3\n[simulation]\ndt = 0.002\nrider = hold\n"
      "[weights]\nzeta_ROM = 0.4\n[optimization]\nsegments = 30\n"
      "sweep_schemes = hics1, hacs1\nsweep_sensitivities = 0, 0.5, 1\n"
      "[output]\ndirectory = elsewhere\nseed = 7\n");
  apply_config(cfg, is);
  cfg.validate();
  EXPECT_EQ(cfg.model.b_phi, 0.2);
  EXPECT_EQ(cfg.gains().k1, -500.0);
  EXPECT_EQ(cfg.control_scheme().name(), "hics2");
  EXPECT_EQ(*cfg.control_scheme().sensitivity(), 0.3);
  EXPECT_EQ(cfg.sim.dt, 0.002);
  EXPECT_EQ(cfg.rider, "hold");
  EXPECT_EQ(cfg.weights.zeta_ROM, 0.4);
  const SweepOptions opt = cfg.sweep_options();
  EXPECT_EQ(opt.segments, 30);
  EXPECT_EQ(opt.schemes, (std::vector<std::string>{"hics1", "hacs1"}));
  EXPECT_EQ(opt.sensitivities, (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_EQ(opt.seed, 7u);
  EXPECT_EQ(cfg.out, fs::path("elsewhere"));
}

TEST_F(CliTest, PresetIsReadableConfig) {
  const Outcome o = run_cli({"preset", "default"});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  RunConfig cfg;
  std::istringstream is(o.out);
  EXPECT_NO_THROW(apply_config(cfg, is));
  EXPECT_EQ(run_cli({"preset", "unknown"}).code, kExitUsage);
}

TEST_F(CliTest, SimulateAtRestStaysAtZero) {
  const Outcome o = run_cli({"simulate", "--scheme", "baseline", "--v0", "0", "--out",
                             (dir / "rest").string()});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const Trajectory t = read_trajectory_csv(dir / "rest" / "trajectory.csv");
  for (std::size_t k = 0; k < t.size(); ++k) {
    ASSERT_EQ(t.states[k], PlanarState{});
    ASSERT_EQ(t.inputs[k].tau, 0.0);
    ASSERT_EQ(t.inputs[k].tau_R, 0.0);
  }
  EXPECT_TRUE(fs::exists(dir / "rest" / "config.ini"));
  EXPECT_TRUE(fs::exists(dir / "rest" / "summary.txt"));
  const auto m = lines(slurp(dir / "rest" / "metrics.csv"));
  ASSERT_EQ(m.size(), 2u);
  const auto fields = split(m[1]);
  EXPECT_EQ(fields[6], "0");  // L
}

TEST_F(CliTest, MisspelledKeyExitsWithUsageError) {
  const fs::path cfg = write("bad.ini", "[model]\nmasss = 3\n");
  const Outcome o = run_cli({"simulate", "--config", cfg.string(), "--out", dir.string()});
  EXPECT_EQ(o.code, kExitUsage);
  EXPECT_NE(o.err.find("masss"), std::string::npos) << o.err;
}

TEST_F(CliTest, UnknownFlagExitsWithUsageError) {
  EXPECT_EQ(run_cli({"simulate", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(run_cli({}).code, kExitUsage);
}

TEST_F(CliTest, ReplayProducesTheTrajectorySchema) {
  // Open-loop torque replay leaves the torso unstable, so keep the horizon short.
  const fs::path cfg = dir / "short.ini";
  std::ofstream(cfg) << "[simulation]\nt_end = 1.5\n";
  const fs::path src = dir / "src";
  ASSERT_EQ(run_cli({"simulate", "--config", cfg.string(), "--scheme", "hacs1", "--nu-p", "0.7",
                     "--out", src.string()})
                .code,
            kExitOk);
  const Outcome o = run_cli({"simulate", "--config", cfg.string(), "--scheme", "hacs1", "--nu-p",
                             "0.7", "--replay", (src / "trajectory.csv").string(), "--out",
                             (dir / "replay").string()});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const auto rows = lines(slurp(dir / "replay" / "trajectory.csv"));
  ASSERT_GT(rows.size(), 2u);
  EXPECT_EQ(rows[0], kTrajectoryCsvHeader);
  for (const auto& r : rows) ASSERT_EQ(split(r).size(), 12u);
}

TEST_F(CliTest, MetricsReproduceTheSimulatorExactly) {
  const fs::path run_dir = dir / "sim";
  ASSERT_EQ(run_cli({"simulate", "--scheme", "hacs1", "--nu-p", "0.5", "--out",
                     run_dir.string()})
                .code,
            kExitOk);
  const auto sim_rows = lines(slurp(run_dir / "metrics.csv"));
  ASSERT_EQ(sim_rows.size(), 2u);
  const auto sim_fields = split(sim_rows[1]);
  ASSERT_EQ(sim_fields[8], "ok");

  const Outcome o = run_cli({"metrics", (run_dir / "trajectory.csv").string()});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const auto out = lines(o.out);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].rfind("# weights (defaults)", 0), 0u) << out[0];
  EXPECT_EQ(out[1], kMetricsCsvHeader);
  const auto fields = split(out[2]);
  for (int i = 3; i <= 7; ++i) EXPECT_EQ(fields[i], sim_fields[i]) << "column " << i;

  const Outcome given =
      run_cli({"metrics", (run_dir / "trajectory.csv").string(), "--zeta-rom", "0.26"});
  ASSERT_EQ(given.code, kExitOk);
  EXPECT_EQ(given.out.rfind("# weights (given)", 0), 0u);
  EXPECT_NE(split(lines(given.out)[2])[3], sim_fields[3]);
}

TEST_F(CliTest, MetricsRejectsSchemaMismatch) {
  const fs::path bad = write("bad.csv", "time,x\n0,0\n");
  EXPECT_EQ(run_cli({"metrics", bad.string()}).code, kExitUsage);
  EXPECT_EQ(run_cli({"metrics", (dir / "missing.csv").string()}).code, kExitUsage);
}

TEST_F(CliTest, OptimizeRejectsIntegralSchemes) {
  EXPECT_EQ(run_cli({"optimize", "--scheme", "hacs2", "--out", dir.string()}).code, kExitUsage);
}

TEST_F(CliTest, SweepIsDeterministicAndPlotsEveryScheme) {
  const fs::path cfg = write("sweep.ini",
                             "[optimization]\nsegments = 20\nsweep_schemes = hics1, hacs1\n"
                             "sweep_sensitivities = 1, 0.9\n");
  const fs::path a = dir / "a", b = dir / "b";
  const Outcome oa = run_cli({"sweep", "--config", cfg.string(), "--out", a.string()});
  ASSERT_EQ(oa.code, kExitOk) << oa.err;
  ASSERT_EQ(run_cli({"sweep", "--config", cfg.string(), "--out", b.string(), "--workers", "1"})
                .code,
            kExitOk);

  const auto rows = lines(slurp(a / "sweep.csv"));
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], kSweepCsvHeader);

  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a);
    if (rel == "config.ini") continue;  // records the output directory
    EXPECT_EQ(slurp(entry.path()), slurp(b / rel)) << rel;
  }
  for (const char* cond : {"hics1_1", "hics1_0.9", "hacs1_1", "hacs1_0.9"}) {
    EXPECT_TRUE(fs::exists(a / cond / "trajectory.csv")) << cond;
    EXPECT_TRUE(fs::exists(a / cond / "panels.svg")) << cond;
    const Outcome m = run_cli({"metrics", (a / cond / "trajectory.csv").string()});
    EXPECT_EQ(m.code, kExitOk) << cond << ": " << m.err;
  }

  namespace pt = boost::property_tree;
  pt::ptree tree;
  ASSERT_NO_THROW(pt::read_xml((a / "J_vs_sensitivity.svg").string(), tree));
  int series = 0;
  std::function<void(const pt::ptree&)> count = [&](const pt::ptree& node) {
    for (const auto& [name, child] : node) {
      if (name == "g" && child.get<std::string>("<xmlattr>.class", "") == "series") ++series;
      count(child);
    }
  };
  count(tree);
  EXPECT_EQ(series, 2);
  pt::ptree panels;
  ASSERT_NO_THROW(pt::read_xml((a / "hacs1_1" / "panels.svg").string(), panels));
}

TEST(Svg, OneSeriesGroupPerScheme) {
  std::vector<SweepRow> rows(5);
  const char* schemes[] = {"hics1", "hics1", "hics2", "hacs1", "hacs1"};
  for (int i = 0; i < 5; ++i) {
    rows[i].row.scheme = schemes[i];
    rows[i].row.param_value = 0.1 * i;
    rows[i].row.metrics.J = 1.0 + i;
    rows[i].converged = i != 2;
  }
  const std::string svg = sweep_plot(rows);
  std::size_t count = 0, pos = 0;
  while ((pos = svg.find("<g class=\"series\"", pos)) != std::string::npos) {
    ++count;
    ++pos;
  }
  EXPECT_EQ(count, 3u);
  const std::regex hollow("<circle[^>]*stroke=\"#[0-9a-f]{6}\" fill=\"white\"");
  EXPECT_EQ(std::distance(std::sregex_iterator(svg.begin(), svg.end(), hollow),
                          std::sregex_iterator()),
            1);
  EXPECT_EQ(render_svg("a < b & c", {}).find("a < b"), std::string::npos);
}

}  // namespace
}  // namespace ridebot::cli
