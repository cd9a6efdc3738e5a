#include "swarmform/config_io.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "gtest/gtest.h"
#include "json.hpp"
#include "swarmform/batch.hpp"

namespace swarmform {
namespace {

namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

std::string error_key(const std::string& text,
                      const std::vector<std::string>& overrides = {}) {
  try {
    config_from_json(text, overrides);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<accepted>";
}

TEST(ConfigFromJson, EmptyObjectGivesDefaults) {
  const ScenarioConfig c = config_from_json("{}");
  EXPECT_EQ(c.sensor_range, 10.0);
  EXPECT_EQ(c.d_s, 0.5);
  EXPECT_EQ(c.formation.l_d, 1.0);
  EXPECT_NEAR(c.formation.phi_right, kPi / 4, 1e-15);
  EXPECT_NEAR(c.formation.phi_left, -kPi / 4, 1e-15);
  EXPECT_EQ(c.n_robots, 11);
  EXPECT_EQ(c.area_side, 30.0);
  EXPECT_EQ(c.dt, 0.1);
  EXPECT_EQ(c.bso.population_size, 20);
}

TEST(ConfigFromJson, RejectsEvenPopulation) {
  EXPECT_EQ(error_key(R"({"n_robots": 4})"), "n_robots");
}

TEST(ConfigFromJson, OverrideTouchesOneField) {
  const ScenarioConfig base = config_from_json("{}");
  const ScenarioConfig c = config_from_json("{}", {"bso.p_one=0.6"});
  EXPECT_EQ(c.bso.p_one, 0.6);
  ScenarioConfig expected = base;
  expected.bso.p_one = 0.6;
  EXPECT_EQ(config_to_json(c), config_to_json(expected));
}

TEST(ConfigFromJson, OverrideBeatsFile) {
  const ScenarioConfig c = config_from_json(R"({"seed": 3})", {"seed=9"});
  EXPECT_EQ(c.seed, 9u);
}

TEST(ConfigFromJson, ErrorsNameTheKey) {
  EXPECT_EQ(error_key(R"({"bogus": 1})"), "bogus");
  EXPECT_EQ(error_key(R"({"bso": {"nope": 1}})"), "bso.nope");
  EXPECT_EQ(error_key(R"({"sensor_range": "far"})"), "sensor_range");
  EXPECT_EQ(error_key(R"({"leader_path": {"type": "zigzag"}})"), "leader_path.type");
  EXPECT_EQ(error_key("{}", {"bso.p_one=2"}), "bso.p_one");
  EXPECT_EQ(error_key("{}", {"no_equals_sign"}), "no_equals_sign");
  EXPECT_THROW(config_from_json("{not json"), ConfigError);
}

TEST(ConfigFromJson, RoundTrips) {
  ScenarioConfig c = config_from_json(
      R"({"n_robots": 7, "leader_path": {"type": "u_turn", "leg": 12, "radius": 2},
          "bso": {"rollout": {"horizon": 9}}, "seed": 77})");
  const std::string once = config_to_json(c);
  const std::string twice = config_to_json(config_from_json(once));
  EXPECT_EQ(once, twice);
  const ScenarioConfig back = config_from_json(once);
  EXPECT_EQ(back.leader_path.kind, PathKind::kUTurn);
  EXPECT_EQ(back.bso.rollout.horizon, 9);
  EXPECT_EQ(back.seed, 77u);
}

TEST(ConfigFromJson, SidecarHoldsEveryField) {
  const auto j = nlohmann::json::parse(config_to_json(ScenarioConfig{}));
  for (const char* key : {"n_robots", "area_side", "sensor_range", "d_s", "formation",
                          "speed_limits", "dt", "max_steps", "leader_path", "bso",
                          "convergence", "seed"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(ParseConfig, MissingFile) {
  EXPECT_THROW(parse_config("/nonexistent/nowhere.json"), ConfigError);
}

TEST(ParseConfig, ShippedScenariosValidate) {
  for (const char* name : {"straight.json", "uturn.json", "scalability.json"}) {
    EXPECT_NO_THROW(parse_config(fs::path(SWARMFORM_SCENARIO_DIR) / name)) << name;
  }
}

// End-to-end checks of the command-line tool.
class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("swarmform_cli_" + std::string(::testing::UnitTest::GetInstance()
                                               ->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int cli(const std::string& args) {
    const std::string cmd = std::string(SWARMFORM_CLI) + " " + args + " >" +
                            (dir_ / "stdout").string() + " 2>" +
                            (dir_ / "stderr").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  fs::path dir_;
};

TEST_F(Cli, RunIsByteIdentical) {
  const fs::path cfg = write("small.json", R"({"n_robots": 5, "area_side": 6, "max_steps": 60})");
  ASSERT_EQ(cli("run --config " + cfg.string() + " --seed 42 --out " + (dir_ / "a").string()), 0);
  ASSERT_EQ(cli("run --config " + cfg.string() + " --seed 42 --out " + (dir_ / "b").string()), 0);
  const std::string a = slurp(dir_ / "a" / "trace.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir_ / "b" / "trace.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "config.json"), slurp(dir_ / "b" / "config.json"));
  // The sidecar carries the seed override.
  EXPECT_EQ(parse_config(dir_ / "a" / "config.json").seed, 42u);
  EXPECT_NE(slurp(dir_ / "stdout").find("robot_id,final_err_norm"), std::string::npos);
}

TEST_F(Cli, ValidateNamesTheBadField) {
  const fs::path bad = write("bad.json", R"({"n_robots": 4})");
  EXPECT_NE(cli("validate --config " + bad.string()), 0);
  EXPECT_NE(slurp(dir_ / "stderr").find("n_robots"), std::string::npos);
  const fs::path good = write("good.json", "{}");
  EXPECT_EQ(cli("validate --config " + good.string()), 0);
}

TEST_F(Cli, InvalidConfigWritesNothing) {
  const fs::path bad = write("bad.json", "{}");
  EXPECT_NE(cli("run --config " + bad.string() + " --set dt=-1 --out " + (dir_ / "o").string()), 0);
  EXPECT_FALSE(fs::exists(dir_ / "o"));
}

TEST_F(Cli, BatchWritesOneRowPerPopulation) {
  const fs::path cfg = write("scal.json", R"({"area_side": 8, "max_steps": 30})");
  ASSERT_EQ(cli("batch --config " + cfg.string() + " --populations 5,7,9,11 --runs 2 --out " +
                (dir_ / "b").string()),
            0)
      << slurp(dir_ / "stderr");
  std::istringstream summary(slurp(dir_ / "b" / "summary.csv"));
  std::string line;
  std::getline(summary, line);
  EXPECT_EQ(line, kSummaryHeader);
  int rows = 0;
  while (std::getline(summary, line)) ++rows;
  EXPECT_EQ(rows, 4);
  int traces = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "b" / "traces")) {
    (void)e;
    ++traces;
  }
  EXPECT_EQ(traces, 8);
}

TEST_F(Cli, FailureRemovesPartialOutputs) {
  const fs::path cfg = write("small.json", R"({"n_robots": 5, "area_side": 6, "max_steps": 20})");
  // trace.csv lands first; config.json then cannot replace a non-empty directory.
  fs::create_directories(dir_ / "o" / "config.json" / "blocker");
  EXPECT_EQ(cli("run --config " + cfg.string() + " --out " + (dir_ / "o").string()), 1);
  EXPECT_FALSE(fs::exists(dir_ / "o" / "trace.csv"));
  EXPECT_FALSE(fs::exists(dir_ / "o" / "config.json.tmp"));
}

TEST_F(Cli, RejectsUnknownCommand) {
  EXPECT_NE(cli("frobnicate"), 0);
  EXPECT_NE(cli("run"), 0);  // --config is required
}

}  // namespace
}  // namespace swarmform
