#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include <json.hpp>

#include "fixtures.hpp"

namespace {

struct Output {
  int code = -1;
  std::string text;
};

Output run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + MINTOPS_CLI + std::string(" ") + args + " 2>&1";
  Output out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.text.append(buf, n);
  const int status = pclose(p);
  out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mintops-cli-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, RunPrintsResult) {
  const auto r = run("run --scenario " + fixtures::data_path("scenarios/warehouse-smoke.json"));
  ASSERT_EQ(r.code, 0) << r.text;
  const auto j = nlohmann::json::parse(r.text);
  EXPECT_EQ(j["success"], true);
  EXPECT_EQ(j["queries_asked"], 2);
  EXPECT_EQ(j["policy"], "mint");
}

TEST(Cli, EnvironmentOverridesConfig) {
  const auto scenario = fixtures::data_path("scenarios/warehouse-smoke.json");
  const auto r = run("run --scenario " + scenario, "MINTOPS_MAX_QUERIES=1");
  ASSERT_EQ(r.code, 0) << r.text;
  EXPECT_EQ(nlohmann::json::parse(r.text)["queries_asked"], 1);
  // The command line wins over the environment.
  const auto r2 = run("run --scenario " + scenario + " --max-queries 5", "MINTOPS_MAX_QUERIES=1");
  EXPECT_EQ(nlohmann::json::parse(r2.text)["queries_asked"], 2);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("run").code, 1);
  EXPECT_EQ(run("run --scenario " + fixtures::data_path("scenarios/shortcut.json") + " --policy greedy").code, 1);
  EXPECT_EQ(run("run --scenario " + fixtures::data_path("scenarios/shortcut.json") + " --h-min -1").code, 1);
  EXPECT_EQ(run("run --scenario /nonexistent/scenario.json").code, 2);
  EXPECT_EQ(run("bench --suite /nonexistent/suite").code, 2);
  EXPECT_EQ(run("gen --out /tmp --params family=maze").code, 1);

  const auto dir = scratch("bad");
  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_EQ(run("run --scenario " + (dir / "broken.json").string()).code, 1);
}

TEST(Cli, GenThenBench) {
  const auto dir = scratch("gen");
  auto r = run("gen --seed 3 --count 4 --params family=shortcut --out " + (dir / "suite").string());
  ASSERT_EQ(r.code, 0) << r.text;
  r = run("bench --suite " + (dir / "suite").string() + " --policies mint,exhaustive --csv " +
          (dir / "r.csv").string() + " --json " + (dir / "r.json").string());
  ASSERT_EQ(r.code, 0) << r.text;
  std::ifstream csv(dir / "r.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "policy,scenario_id,success,queries,cost");
  std::ifstream js(dir / "r.json");
  const auto j = nlohmann::json::parse(js);
  EXPECT_EQ(j["rows"].size(), 8U);
  EXPECT_EQ(j["policies"][0]["policy"], "mint");
}

TEST(Cli, BenchAcceptsGeneratedSpec) {
  const auto r = run("bench --suite gen:family=decoy,count=2 --policies all --seed 9");
  ASSERT_EQ(r.code, 0) << r.text;
  EXPECT_NE(r.text.find("2 scenarios"), std::string::npos);
}
