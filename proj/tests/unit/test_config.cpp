#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "levcool/config.hpp"

using namespace levcool;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path.string();
}

}  // namespace

TEST(Config, Defaults) {
  const auto c = parse_config_text("");
  EXPECT_DOUBLE_EQ(c.protocol.controller.width_factor, 1.9);
  EXPECT_DOUBLE_EQ(c.protocol.controller.p_up, 0.4);
  EXPECT_DOUBLE_EQ(c.protocol.controller.theta_z, 2.75);
  EXPECT_EQ(c.protocol.mode, SimulationMode::bayes);
}

TEST(Config, PresetLoads) {
  const auto c = parse_config_text("preset: table1-A\n");
  ASSERT_TRUE(c.preset.has_value());
  EXPECT_DOUBLE_EQ(c.physical.radius, 0.5e-6);
  EXPECT_NEAR(c.physical.trap_frequency / (2 * physics::kPi), 1e3, 1e-9);
  EXPECT_DOUBLE_EQ(physics::coupling_strength(c.physical), 148e3);
  EXPECT_THROW(parse_config_text("preset: nope\n"), ValidationError);
}

TEST(Config, LogArgumentConstraint) {
  try {
    parse_config_text("controller: {p_up: 0.9, w: 1.9}\n");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    ASSERT_FALSE(e.issues().empty());
  }
}

TEST(Config, ListsEveryViolation) {
  try {
    parse_config_text("controller: {f: 0.2, w: 0.5}\nprotocol: {nbar: -3, quadratures: 4, mode: fast}\n");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_GE(e.issues().size(), 4u);
  }
}

TEST(Config, UnknownKeysReported) {
  EXPECT_THROW(parse_config_text("controller: {wdith: 2}\n"), ValidationError);
  EXPECT_THROW(parse_config_text("colour: blue\n"), ValidationError);
}

TEST(Config, MissingAndMalformedFilesDiffer) {
  EXPECT_THROW(parse_and_validate(std::string("/nonexistent/levcool.yaml")), ConfigFileMissing);
  const auto bad = write_temp("levcool_bad.yaml", "controller: [1, 2\n");
  EXPECT_THROW(parse_and_validate(bad), ConfigFileMalformed);
  std::filesystem::remove(bad);
}

TEST(Config, Precedence) {
  const auto path = write_temp("levcool_ok.yaml",
                               "protocol: {nbar: 300, seed: 4}\noutput: {dir: from_file, threads: 2}\n"
                               "sweep: {trajectories: 7, axes: {f: [0.8, 0.9]}}\n");
  auto c = parse_and_validate(path);
  EXPECT_DOUBLE_EQ(c.protocol.nbar, 300.0);
  EXPECT_EQ(c.output_dir, "from_file");
  EXPECT_EQ(c.sweep.trajectories, 7u);
  ASSERT_EQ(c.sweep.axes.size(), 1u);
  EXPECT_EQ(c.sweep.axes[0].values.size(), 2u);
  EXPECT_DOUBLE_EQ(c.sweep.base.nbar, 300.0);

  setenv("LEVCOOL_OUTPUT_DIR", "from_env", 1);
  setenv("LEVCOOL_THREADS", "3", 1);
  c = parse_and_validate(path);
  EXPECT_EQ(c.output_dir, "from_env");
  EXPECT_EQ(c.threads, 3u);
  c = parse_and_validate(path, {"output.dir=from_flag", "protocol.nbar=50"});
  EXPECT_EQ(c.output_dir, "from_flag");
  EXPECT_DOUBLE_EQ(c.protocol.nbar, 50.0);
  unsetenv("LEVCOOL_OUTPUT_DIR");
  unsetenv("LEVCOOL_THREADS");
  EXPECT_THROW(parse_and_validate(path, {"garbage"}), ValidationError);
  std::filesystem::remove(path);
}
