#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cvsw/app/commands.hpp"

using namespace cvsw;
using namespace cvsw::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("cvsw_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct CliResult {
  int code;
  std::string out;
};

CliResult cli(const std::string& args) {
  const std::string cmd = std::string(CVSW_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = ::popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t k = std::fread(buf, 1, sizeof buf, p)) out.append(buf, k);
  const int status = ::pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

RunConfig config_from_text(const std::string& text) {
  RawConfig raw = default_raw_config();
  parse_config_text(text, raw, "test.cfg");
  return build_config(raw);
}

std::string configs_dir() { return std::string(CVSW_SOURCE_DIR) + "/configs"; }

}  // namespace

// ---------------------------------------------------------------------------
// value parsing
// ---------------------------------------------------------------------------

TEST(ConfigValues, RealExpressions) {
  EXPECT_DOUBLE_EQ(parse_real("1.5", "x"), 1.5);
  EXPECT_DOUBLE_EQ(parse_real("-2e-3", "x"), -2e-3);
  EXPECT_DOUBLE_EQ(parse_real("pi", "x"), std::numbers::pi);
  EXPECT_DOUBLE_EQ(parse_real("-pi", "x"), -std::numbers::pi);
  EXPECT_DOUBLE_EQ(parse_real("2*pi", "x"), 2.0 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(parse_real("pi/2", "x"), std::numbers::pi / 2.0);
  EXPECT_THROW(parse_real("abc", "x"), ConfigError);
  EXPECT_THROW(parse_real("2pi", "x"), ConfigError);
  EXPECT_THROW(parse_real("1.5q", "x"), ConfigError);
  EXPECT_THROW(parse_real("--1", "x"), ConfigError);
}

TEST(ConfigValues, IntegersAndBools) {
  EXPECT_EQ(parse_integer("256", "n"), 256);
  EXPECT_THROW(parse_integer("2.5", "n"), ConfigError);
  EXPECT_TRUE(parse_bool("true", "b"));
  EXPECT_TRUE(parse_bool("yes", "b"));
  EXPECT_FALSE(parse_bool("0", "b"));
  EXPECT_THROW(parse_bool("maybe", "b"), ConfigError);
}

// ---------------------------------------------------------------------------
// initial-condition descriptors
// ---------------------------------------------------------------------------

TEST(InitialDescriptor, SumOfTermsMatchesDirectEvaluation) {
  const SpectralGrid g(64);
  const auto ic = parse_initial("gaussian(center=pi, width=0.5, amplitude=2) + cosine(mode=3, amplitude=0.1, phase=0.2) + "
                                "constant(value=0.5)",
                                "u", 1);
  const Field f = initial_condition(ic, g);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = g.node(j);
    double expect = 0.5 + 0.1 * std::cos(3.0 * x + 0.2);
    for (int w = -2; w <= 2; ++w) {
      const double d = x - std::numbers::pi + 2.0 * std::numbers::pi * w;
      expect += 2.0 * std::exp(-d * d / (2.0 * 0.25));
    }
    EXPECT_NEAR(f[j], expect, 1e-12) << j;
  }
}

TEST(InitialDescriptor, ZeroAndSeeds) {
  const SpectralGrid g(32);
  EXPECT_EQ(initial_condition(parse_initial("0", "u", 1), g).max_abs(), 0.0);
  const Field a = initial_condition(parse_initial("random(kmax=4, amplitude=0.1)", "u", 7), g);
  const Field b = initial_condition(parse_initial("random(kmax=4, amplitude=0.1, seed=7)", "u", 99), g);
  const Field c = initial_condition(parse_initial("random(kmax=4, amplitude=0.1)", "u", 8), g);
  EXPECT_EQ(max_abs_diff(a, b), 0.0);
  EXPECT_GT(max_abs_diff(a, c), 0.0);
}

TEST(InitialDescriptor, SamplesFileRelativeToConfig) {
  const fs::path d = scratch_dir("samples");
  std::ofstream(d / "rho.txt") << "1, 2\n3 4\n5,6,7,8\n";
  const SpectralGrid g(8);
  const Field f = initial_condition(parse_initial("samples(file=rho.txt)", "rho", 1, d), g);
  for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(f[j], static_cast<double>(j + 1));
  EXPECT_THROW(initial_condition(parse_initial("samples(file=rho.txt)", "rho", 1, d), SpectralGrid(16)), Error);
  EXPECT_THROW(parse_initial("samples(file=missing.txt)", "rho", 1, d), ConfigError);
  fs::remove_all(d);
}

TEST(InitialDescriptor, Errors) {
  EXPECT_THROW(parse_initial("wave(k=1)", "u", 1), ConfigError);
  EXPECT_THROW(parse_initial("cosine(mode=1", "u", 1), ConfigError);
  EXPECT_THROW(parse_initial("cosine(mode=1, width=2)", "u", 1), ConfigError);
  EXPECT_THROW(parse_initial("cosine(mode)", "u", 1), ConfigError);
  EXPECT_THROW(parse_initial("cosine", "u", 1), ConfigError);
}

// ---------------------------------------------------------------------------
// configuration files
// ---------------------------------------------------------------------------

TEST(ConfigText, SectionsCommentsAndDottedKeys) {
  const RunConfig c = config_from_text(
      "# header comment\n"
      "[model]\n"
      "a = 3   # trailing comment\n"
      "alpha = 1\n"
      "\n"
      "[time]\n"
      "dt = 2e-3\n"
      "grid.n = 128\n");
  EXPECT_EQ(c.params.a, 3.0);
  EXPECT_EQ(c.params.alpha, 1.0);
  EXPECT_EQ(c.control.dt, 2e-3);
  EXPECT_EQ(c.grid_n, 128u);
  EXPECT_EQ(c.params.kappa, 1.0);
}

TEST(ConfigText, ErrorsCarryLineNumbers) {
  RawConfig raw = default_raw_config();
  try {
    parse_config_text("[model]\na = 2\nbogus = 1\n", raw, "f.cfg");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("f.cfg:3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("model.bogus"), std::string::npos) << e.what();
  }
  try {
    parse_config_text("model.a = 2\njust words\n", raw, "g.cfg");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("g.cfg:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config_text("[model\n", raw, "h.cfg"), ConfigError);
}

TEST(ConfigText, InvalidValuesRejected) {
  EXPECT_THROW(config_from_text("model.a = 1\n"), ConfigError);
  // a = -1 is valid dynamics; only a = 1 is rejected at load time.
  EXPECT_NO_THROW(config_from_text("model.a = -1\n"));
  EXPECT_THROW(config_from_text("grid.n = 7\n"), ConfigError);
  EXPECT_THROW(config_from_text("time.T = 0\n"), ConfigError);
  EXPECT_THROW(config_from_text("time.method = euler\n"), ConfigError);
  EXPECT_THROW(config_from_text("run.formulation = mixed\n"), ConfigError);
  EXPECT_THROW(config_from_text("convergence.ladder = both\n"), ConfigError);
  EXPECT_THROW(config_from_text("initial.u = nope(x=1)\n"), ConfigError);
}

TEST(ConfigText, ExcludedAMessage) {
  try {
    config_from_text("model.a = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("a = 1 excluded"), std::string::npos) << e.what();
  }
}

TEST(ConfigJson, AcceptsPlainObjectAndRunJson) {
  RawConfig raw = default_raw_config();
  parse_config_json(nlohmann::json::parse(R"j({"model.a": 3, "run.track_flowmap": true, "initial.rho": "constant(value=2)"})j"),
                    raw, "x.json");
  EXPECT_EQ(raw["model.a"], "3");
  EXPECT_EQ(raw["run.track_flowmap"], "true");
  RawConfig raw2 = default_raw_config();
  parse_config_json(nlohmann::json::parse(R"j({"config": {"grid.n": "64"}, "status": "completed"})j"), raw2, "run.json");
  EXPECT_EQ(raw2["grid.n"], "64");
  EXPECT_THROW(parse_config_json(nlohmann::json::parse(R"j({"nope": 1})j"), raw, "y.json"), ConfigError);
  EXPECT_THROW(parse_config_json(nlohmann::json::parse(R"j({"model.a": [1]})j"), raw, "y.json"), ConfigError);
}

TEST(ConfigOverrides, AppliedAfterFile) {
  RawConfig raw = default_raw_config();
  parse_config_text("model.a = 3\n", raw, "f");
  apply_overrides({"--model.a=1.5", "--grid.n=64"}, raw);
  const RunConfig c = build_config(raw);
  EXPECT_EQ(c.params.a, 1.5);
  EXPECT_EQ(c.grid_n, 64u);
  EXPECT_THROW(apply_overrides({"--model.q=1"}, raw), ConfigError);
  EXPECT_THROW(apply_overrides({"model.a=1"}, raw), ConfigError);
  EXPECT_THROW(apply_overrides({"--model.a"}, raw), ConfigError);
}

TEST(ConfigEcho, RoundTripsThroughJson) {
  const RunConfig c = config_from_text("model.a = 2.5\ninitial.u = cosine(mode=2, amplitude=0.1)\n");
  const auto echo = config_echo(c.raw);
  RawConfig raw = default_raw_config();
  parse_config_json(nlohmann::json::parse(echo.dump()), raw, "echo");
  EXPECT_EQ(raw, c.raw);
  EXPECT_FALSE(config_echo(c.raw, false).contains("output.dir"));
}

TEST(SampleConfigs, AllLoad) {
  for (const auto& entry : fs::directory_iterator(configs_dir())) {
    EXPECT_NO_THROW(load_config(entry.path(), {})) << entry.path();
  }
}

// ---------------------------------------------------------------------------
// output files
// ---------------------------------------------------------------------------

TEST(Output, AtomicWriteLeavesNoTemporaries) {
  const fs::path d = scratch_dir("atomic");
  write_atomic(d / "sub" / "a.txt", "first");
  write_atomic(d / "sub" / "a.txt", "second");
  EXPECT_EQ(slurp(d / "sub" / "a.txt"), "second");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(d / "sub")) ++files;
  EXPECT_EQ(files, 1u);
  fs::remove_all(d);
}

TEST(Output, NumberFormatRoundTrips) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1e3, 1e3);
  for (int i = 0; i < 200; ++i) {
    const double v = dist(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    EXPECT_EQ(std::stod(fmt(v)), v);
  }
  EXPECT_EQ(fmt(std::nan("")), "nan");
  EXPECT_EQ(fmt(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(snapshot_name(0.25), "snap_0.250000.csv");
}

TEST(Output, CsvSchemas) {
  RunConfig c = config_from_text("grid.n = 32\ntime.T = 0.02\ntime.dt = 1e-2\noutput.snapshot_every = 0.01\n");
  const RunOutcome out = run(c.initial_state(), c.params, c.T, c.control, c.snapshot_every, c.run_options());
  ASSERT_EQ(out.trajectory.size(), 3u);

  const std::string snap = snapshot_csv(out.trajectory[1].state);
  std::istringstream s(snap);
  std::string line;
  std::getline(s, line);
  EXPECT_EQ(line, "x,u,rho,m");
  std::size_t rows = 0;
  while (std::getline(s, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 3);
  }
  EXPECT_EQ(rows, 32u);

  const std::string diag = diagnostics_csv(out, c);
  std::istringstream d(diag);
  std::getline(d, line);
  ASSERT_EQ(line.substr(0, 2), "# ");
  const auto header = nlohmann::json::parse(line.substr(2));
  EXPECT_EQ(header["columns"].size(), 10u);
  EXPECT_EQ(header["config"]["grid.n"], "32");
  EXPECT_FALSE(header["config"].contains("output.dir"));
  std::getline(d, line);
  EXPECT_EQ(line, kDiagnosticsColumns);
  rows = 0;
  while (std::getline(d, line)) ++rows;
  EXPECT_EQ(rows, 3u);

  const std::string trace = ux_trace_csv(out);
  EXPECT_EQ(trace.substr(0, trace.find('\n')), "t,max_ux");
  EXPECT_EQ(static_cast<std::size_t>(std::count(trace.begin(), trace.end(), '\n')), out.ux_trace.size() + 1);
}

TEST(Output, SvgIsWellFormedEnough) {
  RunConfig c = config_from_text("grid.n = 32\ntime.T = 0.02\ntime.dt = 1e-2\noutput.snapshot_every = 0.01\n");
  const RunOutcome out = run(c.initial_state(), c.params, c.T, c.control, c.snapshot_every, c.run_options());
  for (const std::string& svg : {waterfall_svg(out), diagnostics_svg(out)}) {
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_EQ(svg.find("nan"), std::string::npos);
  }
}

TEST(Commands, LoglogSlope) {
  const std::vector<double> x{1, 2, 4, 8};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 2.5));
  EXPECT_NEAR(loglog_slope(x, y), 2.5, 1e-12);
}

TEST(Commands, CoefficientsJsonFields) {
  const RunConfig c = config_from_text("model.a = 3\nmodel.alpha = 1\n");
  const auto d = derive_coefficients(c.params, c.branch);
  const auto j = coefficients_json(d, c.params, c.branch);
  EXPECT_DOUBLE_EQ(j["c"].get<double>(), (1.0 + std::sqrt(5.0)) / 2.0);
  EXPECT_LE(j["residuals"]["max_asserted"].get<double>(), 1e-12);
  EXPECT_NEAR(j["reported"]["m1p_(a-2)k1"].get<double>(), 0.0, 1e-12);
  EXPECT_GT(std::abs(j["reported"]["m1p_2(a-2)k1"].get<double>()), 0.1);
}

// ---------------------------------------------------------------------------
// command-line binary
// ---------------------------------------------------------------------------

TEST(Cli, HelpAndVersion) {
  const auto h = cli("--help");
  EXPECT_EQ(h.code, 0);
  for (const char* sub : {"run", "coefficients", "compare", "convergence"}) {
    EXPECT_NE(h.out.find(sub), std::string::npos) << sub;
  }
  EXPECT_EQ(cli("--version").code, 0);
  EXPECT_NE(cli("").code, 0);
}

TEST(Cli, SteadyRunWritesArtifacts) {
  const fs::path d = scratch_dir("steady");
  const auto r = cli("run --config " + configs_dir() + "/steady.cfg --output.dir=" + d.string() + " --plot");
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* f : {"run.json", "diagnostics.csv", "ux_trace.csv", "snap_0.000000.csv", "snap_1.000000.csv",
                        "u_waterfall.svg", "diagnostics.svg"}) {
    EXPECT_TRUE(fs::exists(d / f)) << f;
  }
  const auto meta = nlohmann::json::parse(slurp(d / "run.json"));
  EXPECT_EQ(meta["status"], "completed");
  EXPECT_EQ(meta["t_final"].get<double>(), 1.0);
  EXPECT_TRUE(meta["positivity"]["preserved"].get<bool>());
  EXPECT_EQ(slurp(d / "snap_0.000000.csv"), slurp(d / "snap_1.000000.csv"));
  fs::remove_all(d);
}

TEST(Cli, BlowupIsAResultNotAnError) {
  const fs::path d = scratch_dir("ch");
  const auto r = cli("run --config " + configs_dir() + "/ch_breaking.cfg --output.dir=" + d.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("blow-up criterion exceeded at t ="), std::string::npos) << r.out;
  const auto meta = nlohmann::json::parse(slurp(d / "run.json"));
  EXPECT_EQ(meta["status"], "blowup_detected");
  EXPECT_LT(meta["t_final"].get<double>(), 2.0);
  EXPECT_GT(meta["final_max_ux"].get<double>(), 10.0);
  fs::remove_all(d);
}

TEST(Cli, RerunFromRunJsonIsBitIdentical) {
  const fs::path d1 = scratch_dir("det1");
  const fs::path d2 = scratch_dir("det2");
  const auto r1 = cli("run --config " + configs_dir() + "/small_data_a2.cfg --time.T=0.2 --run.seed=3 "
                      "--initial.u=\"random(kmax=6, amplitude=0.05)\" --output.dir=" + d1.string());
  ASSERT_EQ(r1.code, 0) << r1.out;
  const auto r2 = cli("run --config " + (d1 / "run.json").string() + " --output.dir=" + d2.string());
  ASSERT_EQ(r2.code, 0) << r2.out;
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(d1)) {
    const std::string name = e.path().filename().string();
    if (e.path().extension() != ".csv") continue;
    EXPECT_EQ(slurp(e.path()), slurp(d2 / name)) << name;
    ++compared;
  }
  EXPECT_GE(compared, 4u);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Cli, ErrorsExitNonzeroWithMessage) {
  auto r = cli("coefficients --model.a=1");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("a = 1 excluded"), std::string::npos) << r.out;
  r = cli("run --no.such=1");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("unknown key"), std::string::npos) << r.out;
  r = cli("run --config /nonexistent/file.cfg");
  EXPECT_EQ(r.code, 1);
  r = cli("coefficients --model.a=-1");
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, CoefficientsTableJsonAndSweep) {
  auto r = cli("coefficients --model.a=2.5 --model.alpha=1");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("beta0^2"), std::string::npos);
  r = cli("coefficients --model.a=2.5 --json");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["c"].get<double>(), 1.0);
  r = cli("coefficients --sweep");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n') >= 9, true);
  EXPECT_NE(r.out.find("\n2.5,1,"), std::string::npos) << r.out;
}

TEST(Cli, CompareVerdicts) {
  const fs::path d = scratch_dir("compare");
  auto r = cli("compare --config " + configs_dir() + "/compare.cfg --time.T=0.1 --grid.n=128 --output.dir=" + d.string());
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = nlohmann::json::parse(slurp(d / "compare.json"));
  EXPECT_EQ(j["verdict"], "pass");
  EXPECT_TRUE(fs::exists(d / "compare.csv"));

  r = cli("compare --config " + configs_dir() + "/compare.cfg --time.T=0.1 --grid.n=128 --compare.threshold=1e-18 "
          "--output.dir=" + d.string());
  EXPECT_EQ(r.code, 2) << r.out;
  j = nlohmann::json::parse(slurp(d / "compare.json"));
  EXPECT_EQ(j["verdict"], "fail");

  r = cli("compare --time.T=1 --grid.n=128 --initial.u=\"cosine(mode=1, amplitude=1, phase=pi/2)\" "
          "--initial.rho=0 --time.max_ux=3 --output.dir=" + d.string());
  EXPECT_EQ(r.code, 2) << r.out;
  j = nlohmann::json::parse(slurp(d / "compare.json"));
  EXPECT_EQ(j["verdict"], "incomplete");
  fs::remove_all(d);
}

TEST(Cli, TemporalConvergence) {
  const fs::path d = scratch_dir("conv");
  const auto r = cli("convergence --config " + configs_dir() + "/convergence_temporal.cfg --output.dir=" + d.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(slurp(d / "convergence.json"));
  EXPECT_EQ(j["verdict"], "pass");
  EXPECT_NEAR(j["slope"].get<double>(), 4.0, 0.3);
  EXPECT_EQ(j["errors"].size(), 4u);
  EXPECT_TRUE(fs::exists(d / "convergence.csv"));
  fs::remove_all(d);
}
