#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "skilllab/cli.hpp"
#include "skilllab/config.hpp"
#include "skilllab/pipeline/artifacts.hpp"

namespace skilllab {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("skilllab_cli_" + name);
  fs::remove_all(p);
  return p;
}

// A config small enough for a sub-second end-to-end run.
fs::path write_tiny_config(const fs::path& dir) {
  nlohmann::json j = {{"skills", 3},
                      {"iterations", 1},
                      {"eval_rollouts", 2},
                      {"random_rollouts", 2},
                      {"landscape_resolution", 6},
                      {"oracle_samples", 4096},
                      {"ppo", {{"horizon", 100}, {"batch_size", 50}, {"epochs", 1}}},
                      {"network", {{"hidden_units", 8}}},
                      {"vqvae", {{"hidden_units", 8}, {"train_steps", 20}, {"batch_size", 32}}}};
  fs::create_directories(dir);
  pipeline::write_json(dir / "tiny.json", j);
  return dir / "tiny.json";
}

TEST(Cli, AnalyzeGridworldMaxIsLogTwo) {
  ::testing::internal::CaptureStdout();
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(cli_main({"analyze-gridworld", "--skills", "2"}), 0);
  const std::string out = ::testing::internal::GetCapturedStdout();
  const std::string err = ::testing::internal::GetCapturedStderr();
  const auto j = nlohmann::json::parse(out);
  EXPECT_EQ(j.at("form"), "reverse");
  double best = -1e300;
  for (const auto& skill : j.at("reward"))
    for (const auto& row : skill)
      for (const auto& v : row)
        if (v.is_number()) best = std::max(best, v.get<double>());
  EXPECT_NEAR(best, std::log(2.0), 1e-9);
  EXPECT_NE(err.find("max reward"), std::string::npos);
}

TEST(Cli, AnalyzeGridworldWritesBothForms) {
  const fs::path dir = scratch_dir("grid");
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(cli_main({"analyze-gridworld", "--skills", "2", "--out", dir.string()}), 0);
  ::testing::internal::GetCapturedStderr();
  const auto rev = pipeline::read_json(dir / "gridworld-reverse.json");
  const auto fwd = pipeline::read_json(dir / "gridworld-forward.json");
  EXPECT_EQ(rev.at("reward").size(), 2u);
  EXPECT_EQ(fwd.at("form"), "forward");
  fs::remove_all(dir);
}

TEST(Cli, BadFlagsGiveNonzeroExit) {
  ::testing::internal::CaptureStdout();
  ::testing::internal::CaptureStderr();
  EXPECT_NE(cli_main({}), 0);
  EXPECT_NE(cli_main({"frobnicate"}), 0);
  EXPECT_NE(cli_main({"run", "--method", "diayn"}), 0);
  EXPECT_NE(cli_main({"run", "--explore", "everywhere"}), 0);
  EXPECT_NE(cli_main({"run", "--region", "1", "2", "3"}), 0);
  EXPECT_NE(cli_main({"run", "--maze", "no-such-maze", "--out", "/tmp/skilllab_cli_nomaze"}), 0);
  EXPECT_NE(cli_main({"run", "--explore", "restricted", "--out", "/tmp/skilllab_cli_noregion"}),
            0);
  EXPECT_NE(cli_main({"eval"}), 0);
  EXPECT_NE(cli_main({"analyze-gridworld", "--skills", "0"}), 0);
  ::testing::internal::GetCapturedStdout();
  ::testing::internal::GetCapturedStderr();
  fs::remove_all("/tmp/skilllab_cli_nomaze");
  fs::remove_all("/tmp/skilllab_cli_noregion");
}

TEST(Cli, UnknownConfigKeyIsAnError) {
  const fs::path dir = scratch_dir("badcfg");
  fs::create_directories(dir);
  pipeline::write_json(dir / "bad.json", {{"skils", 3}});
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(cli_main({"run", "--config", (dir / "bad.json").string()}), 2);
  EXPECT_NE(::testing::internal::GetCapturedStderr().find("skils"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, TinyRunThenEvalWithInterpolation) {
  const fs::path dir = scratch_dir("run");
  const fs::path cfg = write_tiny_config(dir);
  const fs::path out = dir / "edl";
  ::testing::internal::CaptureStdout();
  ASSERT_EQ(cli_main({"run", "--config", cfg.string(), "--seed", "3", "--out", out.string(),
                      "--quiet"}),
            0);
  const auto cov = nlohmann::json::parse(::testing::internal::GetCapturedStdout());
  EXPECT_GT(cov.at("coverage").get<double>(), 0.0);
  EXPECT_EQ(cov.at("goal_distance").size(), 3u);

  const RunConfig stored = RunConfig::from_json(pipeline::read_json(out / "config.json"));
  EXPECT_EQ(stored.seed, 3u);
  EXPECT_EQ(stored.skills, 3);

  ::testing::internal::CaptureStdout();
  ASSERT_EQ(cli_main({"eval", "--out", out.string(), "--interpolate", "0", "2", "--steps", "5"}),
            0);
  ::testing::internal::GetCapturedStdout();
  const auto interp = pipeline::read_json(out / "eval/interpolation.json");
  EXPECT_EQ(interp.at("sets").size(), 5u);
  EXPECT_EQ(interp.at("i"), 0);
  EXPECT_EQ(interp.at("j"), 2);
  fs::remove_all(dir);
}

TEST(Cli, StagesContinueFromTheRunDirectory) {
  const fs::path dir = scratch_dir("stages");
  const fs::path cfg = write_tiny_config(dir);
  const std::string out = (dir / "run").string();
  ::testing::internal::CaptureStderr();
  ASSERT_EQ(cli_main({"explore", "--config", cfg.string(), "--out", out}), 0);
  EXPECT_TRUE(fs::exists(fs::path(out) / "buffer.json"));
  // Later stages pick the stored config up without --config.
  ASSERT_EQ(cli_main({"discover", "--out", out}), 0);
  EXPECT_TRUE(fs::exists(fs::path(out) / "codebook.json"));
  ASSERT_EQ(cli_main({"learn", "--out", out, "--iterations", "2"}), 0);
  const auto stored = pipeline::read_json(fs::path(out) / "config.json");
  EXPECT_EQ(stored.at("iterations"), 2);
  EXPECT_EQ(stored.at("skills"), 3);
  // Changing what the buffer was built from is refused.
  EXPECT_EQ(cli_main({"learn", "--out", out, "--seed", "99"}), 2);
  EXPECT_NE(::testing::internal::GetCapturedStderr().find("different seed"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, GridsearchListsCartesianProduct) {
  ::testing::internal::CaptureStdout();
  ASSERT_EQ(cli_main({"gridsearch", "--method", "reverse", "--out", "/tmp/skilllab_gs", "--list"}),
            0);
  const std::string out = ::testing::internal::GetCapturedStdout();
  const auto lines = std::count(out.begin(), out.end(), '\n');
  EXPECT_EQ(lines, static_cast<long>(agents::PPOConfig::entropy_grid().size() *
                                     agents::PPOConfig::lr_grid().size()));
  ::testing::internal::CaptureStdout();
  ASSERT_EQ(cli_main({"gridsearch", "--method", "edl", "--explore", "smm", "--sibling-rivalry",
                      "--out", "/tmp/skilllab_gs", "--list"}),
            0);
  const std::string all = ::testing::internal::GetCapturedStdout();
  EXPECT_EQ(std::count(all.begin(), all.end(), '\n'),
            static_cast<long>(lines * 3 * density::VqVaeConfig::commitment_grid().size() *
                              explore::SmmConfig::alpha_grid().size() *
                              explore::SmmConfig::vae_beta_grid().size()));
  fs::remove_all("/tmp/skilllab_gs");
}

}  // namespace
}  // namespace skilllab
