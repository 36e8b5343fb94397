#include "grid/dataset.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

namespace fs = std::filesystem;

namespace {

int grid_cli(const std::string& args) {
  const std::string cmd = std::string(GRID_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("grid_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(grid_cli("simulate --scenario tiny --out /tmp/x.csv"), 2);
  EXPECT_EQ(grid_cli("simulate --scenario base"), 2);
  EXPECT_EQ(grid_cli("frobnicate"), 2);
  const auto dir = scratch("usage");
  ASSERT_EQ(grid_cli("simulate --scenario base --n 50 --out " + (dir / "d.csv").string()), 0);
  EXPECT_EQ(grid_cli("discover --data " + (dir / "d.csv").string() + " --shd-termination --out " + dir.string()), 2);
}

TEST(Cli, SimulateWritesRowsAndIsDeterministic) {
  const auto dir = scratch("simulate");
  ASSERT_EQ(grid_cli("simulate --scenario noisy --n 120 --seed 4 --out " + (dir / "a.csv").string()), 0);
  ASSERT_EQ(grid_cli("simulate --scenario noisy --n 120 --seed 4 --out " + (dir / "b.csv").string()), 0);
  const auto a = grid::read_text_file((dir / "a.csv").string());
  EXPECT_EQ(a, grid::read_text_file((dir / "b.csv").string()));
  const auto t = grid::parse_samples_csv(a);
  EXPECT_EQ(t.values.rows(), 120);
  EXPECT_EQ(t.values.cols(), 5);
}

TEST(Cli, ScenarioMatchesShippedFile) {
  const auto dir = scratch("scenario");
  ASSERT_EQ(grid_cli("scenario --name hidden --out " + (dir / "h.json").string()), 0);
  EXPECT_EQ(nlohmann::json::parse(grid::read_text_file((dir / "h.json").string())),
            nlohmann::json::parse(grid::read_text_file(std::string(GRID_SCENARIO_DIR) + "/hidden.json")));
}

TEST(Cli, DiscoverWritesArtifacts) {
  const auto dir = scratch("discover");
  ASSERT_EQ(grid_cli("discover --scenario base --seed 2 --out " + dir.string()), 0);
  for (const char* f : {"graph.json", "report.json", "interventions.jsonl", "metrics.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const auto report = nlohmann::json::parse(grid::read_text_file((dir / "report.json").string()));
  EXPECT_EQ(report["metrics"]["shd"], 0);
  EXPECT_EQ(report["manifest"]["seed"], 2);
}

TEST(Cli, CsvWithGroundTruthIsObservationOnly) {
  const auto dir = scratch("csv");
  ASSERT_EQ(grid_cli("simulate --scenario base --n 400 --seed 3 --out " + (dir / "d.csv").string()), 0);
  nlohmann::json gt{{"nodes", {"Temperature", "Humidity", "AirQuality", "EnergyConsumption", "OverallSatisfaction"}},
                    {"edges", nlohmann::json::array({nlohmann::json::array({"Temperature", "EnergyConsumption"})})}};
  grid::write_text_file_atomic((dir / "gt.json").string(), gt.dump());
  ASSERT_EQ(grid_cli("discover --data " + (dir / "d.csv").string() + " --ground-truth " + (dir / "gt.json").string() +
                     " --out " + (dir / "out").string()),
            0);
  const auto report = nlohmann::json::parse(grid::read_text_file((dir / "out" / "report.json").string()));
  EXPECT_EQ(report["termination"], "observation_only");
  EXPECT_EQ(report["interventions"], 0);
  EXPECT_TRUE(report["metrics"].contains("f1"));
}
