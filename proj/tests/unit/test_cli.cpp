#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct Cli : ::testing::Test {
  fs::path dir;
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("levcool_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  int run(const std::string& args) {
    const std::string cmd = std::string(LEVCOOL_CLI) + " " + args + " --output " + dir.string() + " > " +
                            (dir / "stdout.txt").string() + " 2> " + (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string read(const std::string& name) {
    std::ifstream in(dir / name);
    return {std::istreambuf_iterator<char>(in), {}};
  }
  fs::path run_dir(const std::string& command) {
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_directory() && e.path().filename().string().ends_with(command)) return e.path();
    return {};
  }
};

}  // namespace

TEST_F(Cli, ValidatePassesAndFaultInjectionFails) {
  EXPECT_EQ(run("validate"), 0);
  EXPECT_NE(read("stdout.txt").find("tolerance"), std::string::npos);
  EXPECT_EQ(run("validate --alpha 2.0"), 1);
  EXPECT_NE(read("stdout.txt").find("gaussian_profile_vs_alpha_model     NO"), std::string::npos);
}

TEST_F(Cli, CoolWritesRunDirectory) {
  ASSERT_EQ(run("cool --seed 3 --f 0.9"), 0);
  const auto d = run_dir("cool");
  ASSERT_FALSE(d.empty());
  const auto manifest = nlohmann::json::parse(std::ifstream(d / "manifest.json"));
  EXPECT_EQ(manifest["status"], "ok");
  EXPECT_TRUE(fs::exists(d / "trajectory.json"));
  EXPECT_TRUE(fs::exists(d / "steps.csv"));
  EXPECT_DOUBLE_EQ(manifest["config"]["controller"]["f"].get<double>(), 0.9);
}

TEST_F(Cli, ValidationErrorsExitOne) {
  EXPECT_EQ(run("cool --f 0.3"), 1);
  const auto err = nlohmann::json::parse(read("stderr.txt"));
  EXPECT_EQ(err["status"], "validation_failed");
  EXPECT_FALSE(err["errors"].empty());
  EXPECT_EQ(run("cool --config /nonexistent.yaml"), 1);
  EXPECT_EQ(nlohmann::json::parse(read("stderr.txt"))["status"], "config_missing");
  EXPECT_EQ(run("cool --set controller.p_up=0.9"), 1);
}

TEST_F(Cli, PhysicsAndProfile) {
  ASSERT_EQ(run("physics --preset table1-A"), 0);
  EXPECT_NE(read("stdout.txt").find("coupling_per_s"), std::string::npos);
  ASSERT_EQ(run("profile --sigma-p 0.5"), 0);
  const auto d = run_dir("profile");
  EXPECT_TRUE(fs::exists(d / "profile.csv"));
  EXPECT_TRUE(fs::exists(d / "fit.csv"));
}

TEST_F(Cli, SweepOutputs) {
  ASSERT_EQ(run("sweep --axis f=0.9,1 --trajectories 3"), 0);
  const auto d = run_dir("sweep");
  for (const char* f : {"sweep_long.csv", "sweep_wide.csv", "summary.json", "manifest.json"})
    EXPECT_TRUE(fs::exists(d / f)) << f;
}
