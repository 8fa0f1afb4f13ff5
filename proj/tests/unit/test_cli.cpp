#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"

using namespace bwave::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bwave_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Config, KeyValueSectionsAndDottedKeys) {
  const auto cfg = parse_config(R"(
# experiment
command = wave
deterministic = true
[reaction]
family = tent
alpha = 0.2   # threshold
[grid]
nx = 512
H_policy = fixed
H = 3
)");
  EXPECT_EQ(cfg.command, Command::wave);
  EXPECT_EQ(cfg.reaction.family, "tent");
  EXPECT_DOUBLE_EQ(cfg.reaction.alpha, 0.2);
  EXPECT_EQ(cfg.grid.nx, 512);
  EXPECT_EQ(cfg.grid.H_policy, "fixed");
  EXPECT_DOUBLE_EQ(cfg.grid.H, 3.0);
}

TEST(Config, DottedKeysAtTopLevel) {
  const auto cfg = parse_config("command = continue\ncontinue.schedule = 4, 8, 16\nspeed.speed_tol = 1e-7\n");
  EXPECT_EQ(cfg.command, Command::continuation);
  EXPECT_EQ(cfg.cont.schedule, (std::vector<double>{4.0, 8.0, 16.0}));
  EXPECT_DOUBLE_EQ(cfg.speed.speed_tol, 1e-7);
}

TEST(Config, UnknownKeyIsNamed) {
  try {
    parse_config("command = solve\n[grid]\nnz = 4\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("grid.nz"), std::string::npos);
  }
  EXPECT_THROW(parse_config("command = dance\n"), ConfigError);
  EXPECT_THROW(parse_config("grid.nx = many\n"), ConfigError);
  EXPECT_THROW(parse_config("grid.nx = 1.5\n"), ConfigError);
  EXPECT_THROW(parse_config("just words\n"), ConfigError);
  EXPECT_THROW(parse_config("{\"grid\": {\"nx\": }"), ConfigError);
}

TEST(Config, JsonEquivalentToKeyValue) {
  const auto a = parse_config("command = scan\nscan.eta = 0.05\nreaction.alpha = 0.3\n");
  const auto b = parse_config(R"({"command": "scan", "scan": {"eta": 0.05}, "reaction": {"alpha": 0.3}})");
  EXPECT_EQ(to_json(a), to_json(b));
}

TEST(Config, ResolvedJsonRoundTrips) {
  auto cfg = parse_config("command = validate\nvalidate.levels = 64, 128\noutput.stem = run1\n");
  const auto j = to_json(cfg);
  EXPECT_EQ(j["validate"]["levels"], nlohmann::json::array({64, 128}));
  EXPECT_EQ(to_json(config_from_json(j)), j);
}

TEST(Config, SampleConfigsAreValid) {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(BWAVE_CONFIG_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    ++seen;
    const auto cfg = load_config(entry.path().string());
    EXPECT_NO_THROW(check(cfg)) << entry.path();
    EXPECT_EQ(to_string(cfg.command), entry.path().stem().string());
  }
  EXPECT_EQ(seen, 5);
}

TEST(Config, PreconditionsChecked) {
  auto cfg = parse_config("command = solve\n");
  EXPECT_NO_THROW(check(cfg));
  cfg.reaction.alpha = 1.5;
  EXPECT_THROW(check(cfg), ConfigError);
  cfg = parse_config("command = continue\ncontinue.schedule = 8, 4\n");
  EXPECT_THROW(check(cfg), ConfigError);
  cfg = parse_config("command = tail\n");
  EXPECT_THROW(check(cfg), ConfigError);
  cfg = parse_config("grid.nx = 15\n");
  EXPECT_THROW(check(cfg), ConfigError);
}

TEST(Run, ValidateWritesReport) {
  const fs::path dir = scratch("validate");
  auto cfg = parse_config("command = validate\nvalidate.samples = 1000\n");
  std::ostringstream log;
  EXPECT_EQ(run(cfg, {dir, true, 1}, log), exit_ok) << log.str();
  const auto j = nlohmann::json::parse(slurp(dir / "validate.json"));
  EXPECT_EQ(j["format_version"], format_version);
  EXPECT_EQ(j["config"], to_json(cfg));
  EXPECT_TRUE(j["pass"].get<bool>());
  for (double p : j["manufactured_orders"]) EXPECT_GE(p, 1.8);
}

TEST(Run, SolveIsByteDeterministic) {
  const fs::path a = scratch("solve_a"), b = scratch("solve_b");
  auto cfg = parse_config("command = solve\nsolve.c = 1.5\ngrid.R = 4\ngrid.nx = 64\n");
  std::ostringstream log;
  ASSERT_EQ(run(cfg, {a, true, 1}, log), exit_ok);
  ASSERT_EQ(run(cfg, {b, true, 1}, log), exit_ok);
  for (const char* name : {"solve.json", "solve_field.csv"}) EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  for (const auto& entry : fs::directory_iterator(a)) EXPECT_NE(entry.path().extension(), ".tmp");
  const std::string csv = slurp(a / "solve_field.csv");
  EXPECT_EQ(csv.rfind("# format_version: 1\n# command: solve\n# config: {", 0), 0u);
}

TEST(Run, TailReadsSolveOutput) {
  const fs::path dir = scratch("tail");
  std::ostringstream log;
  ASSERT_EQ(run(parse_config("command = solve\nsolve.c = 2\ngrid.R = 8\ngrid.nx = 256\n"), {dir, true, 1}, log), exit_ok);
  auto cfg = parse_config("command = tail\n");
  cfg.tail.field = (dir / "solve_field.csv").string();
  cfg.output.stem = "t";
  EXPECT_EQ(run(cfg, {dir, true, 1}, log), exit_ok) << log.str();
  const auto j = nlohmann::json::parse(slurp(dir / "t.json"));
  EXPECT_DOUBLE_EQ(j["c"].get<double>(), 2.0);
  EXPECT_TRUE(j.contains("mu0_formula"));
  EXPECT_TRUE(fs::exists(dir / "t_tail.csv"));
}

TEST(Run, ScanReportsThreshold) {
  const fs::path dir = scratch("scan");
  std::ostringstream log;
  ASSERT_EQ(run(parse_config("command = scan\n"), {dir, true, 1}, log), exit_ok);
  const auto j = nlohmann::json::parse(slurp(dir / "scan.json"));
  EXPECT_FALSE(j["empirical_K"].is_null());
  EXPECT_EQ(j["item2_sharp"]["passed"], j["item2_sharp"]["samples"]);
}

TEST(Run, NonConvergenceExitCode) {
  const fs::path dir = scratch("noconv");
  auto cfg = parse_config("command = solve\nsolve.c = 1\ngrid.R = 8\ngrid.nx = 256\nsolver.max_outer = 2\n");
  std::ostringstream log;
  EXPECT_EQ(run(cfg, {dir, true, 1}, log), exit_nonconvergence);
}

TEST(Run, BadParametersAreConfigErrors) {
  const fs::path dir = scratch("bad");
  std::ostringstream log;
  // c hx > 1 violates the solver's Peclet precondition
  EXPECT_THROW(run(parse_config("command = solve\nsolve.c = 40\ngrid.nx = 64\n"), {dir, true, 1}, log), ConfigError);
}

TEST(WriteAtomically, ReplacesContent) {
  const fs::path dir = scratch("atomic");
  write_atomically(dir / "x.txt", "one");
  write_atomically(dir / "x.txt", "two");
  EXPECT_EQ(slurp(dir / "x.txt"), "two");
  EXPECT_FALSE(fs::exists(dir / "x.txt.tmp"));
}
