#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gcmc/cli.hpp"

using namespace gcmc;
using gcmc::io::json;

namespace {

const std::string kData = GCMC_DATA_DIR;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& f) { return kData + "/" + f; }

std::vector<std::string> ends_args(const std::string& cmd) {
  return {cmd, "--graph", data("ends_graph.json"), "--dist", data("ends_dist.json")};
}

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  auto p = std::filesystem::temp_directory_path() / ("gcmc_test_" + name);
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST(Cli, ClassifyReportsWitness) {
  auto r = invoke(ends_args("classify"));
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["case"], "SUPPORT_IN_ONE_COMPONENT");
  EXPECT_TRUE(j.contains("witness"));
}

TEST(Cli, ClassifySplitExitsInfeasible) {
  auto r = invoke({"classify", "--graph", data("split_graph.json"), "--dist", data("split_dist.json")});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(json::parse(r.out)["case"], "SUPPORT_SPLIT");
}

TEST(Cli, KernelMatchesHandComputedMatrix) {
  auto args = ends_args("kernel");
  args.insert(args.end(), {"--k", "4"});
  auto r = invoke(args);
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["p"].get<double>(), 0.125);
  std::vector<std::vector<double>> expect{{0.875, 0, 0.125, 0}, {0, 0.875, 0, 0.125}, {0.375, 0, 0.5, 0.125}, {0, 0.375, 0.125, 0.5}};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(j["matrix"][i][k].get<double>(), expect[i][k]);
}

TEST(Cli, KernelOfTargetWithZerosFails) {
  auto r = invoke(ends_args("kernel"));
  EXPECT_EQ(r.code, 2);
  auto e = json::parse(r.err);
  EXPECT_EQ(e["error"], "ZeroMass");
  EXPECT_TRUE(e.contains("detail"));
}

TEST(Cli, DobrushinBound) {
  auto args = ends_args("dobrushin");
  args.insert(args.end(), {"--k", "4", "--contraction-steps", "9"});
  auto r = invoke(args);
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["delta"].get<double>(), 0.9296875);
  EXPECT_TRUE(j["holds"].get<bool>());
  EXPECT_TRUE(j["contraction"]["holds"].get<bool>());
}

TEST(Cli, PlanPrintsExactBoundaries) {
  auto args = ends_args("plan");
  args.insert(args.end(), {"--schedule", "paper"});
  auto r = invoke(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\"1096024843375\""), std::string::npos);
}

TEST(Cli, PlanWithoutScheduleIsRejected) {
  auto r = invoke(ends_args("plan"));
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.err)["error"], "MissingSchedule");
}

TEST(Cli, HomogeneousModeIsInfeasible) {
  auto args = ends_args("plan");
  args.insert(args.end(), {"--mode", "homogeneous"});
  auto r = invoke(args);
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(json::parse(r.out)["mode"], "INFEASIBLE");
  args[0] = "simulate";
  r = invoke(args);
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(json::parse(r.err)["error"], "InfeasiblePlan");
}

TEST(Cli, ConflictingOptions) {
  auto args = ends_args("simulate");
  args.insert(args.end(), {"--epsilon", "0.1", "--schedule", "paper"});
  auto r = invoke(args);
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.err)["error"], "ConflictingOptions");
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"bogus"}).code, 2);
  EXPECT_EQ(invoke({"classify", "--graph", data("nope.json"), "--dist", data("ends_dist.json")}).code, 2);
  auto bad = temp_file("bad.json", "{\"labels\": [\"a\", \"a\"], \"edges\": []}");
  auto r = invoke({"classify", "--graph", bad.string(), "--dist", data("ends_dist.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.err)["error"], "DuplicateLabel");
  auto args = ends_args("classify");
  args.insert(args.end(), {"--format", "csv"});
  EXPECT_EQ(invoke(args).code, 2);
}

TEST(Cli, SimulateIsByteIdenticalAcrossRuns) {
  auto args = ends_args("simulate");
  args.insert(args.end(), {"--epsilon", "0.05", "--steps", "20000", "--replicas", "3", "--checkpoints", "100,20000"});
  auto a = invoke(args);
  args.insert(args.end(), {"--threads", "1"});
  auto b = invoke(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  auto j = json::parse(a.out);
  EXPECT_EQ(j["replica_count"], 3);
  EXPECT_EQ(j["reports"].size(), 3u);
  EXPECT_EQ(j["mode"], "HOMOGENEOUS");
}

TEST(Cli, SimulateWithScheduleFileAndTrace) {
  auto trace = std::filesystem::temp_directory_path() / "gcmc_test_trace.csv";
  auto args = ends_args("simulate");
  args.insert(args.end(), {"--schedule", data("geometric_schedule.json"), "--steps", "1000", "--trace", trace.string()});
  auto r = invoke(args);
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(trace);
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  EXPECT_EQ(line, "time,state");
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 1001u);
  EXPECT_FALSE(json::parse(r.out)["merged"]["faithful"].get<bool>());
}

TEST(Cli, SimulateCsvCounts) {
  auto args = ends_args("simulate");
  args.insert(args.end(), {"--epsilon", "0.1", "--steps", "500", "--format", "csv"});
  auto r = invoke(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "label,visit_count,empirical,target");
}

TEST(Cli, ProductSpec) {
  auto r = invoke({"product", "--spec", data("product_k2.json"), "--steps", "100000"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["joint"]["consistency_violations"], 0);
  EXPECT_LE(j["joint"]["final_tv"].get<double>(), 0.05);
}

TEST(Cli, ProductWithSplitFactorExitsInfeasible) {
  auto spec = temp_file("split_spec.json", "{\"factors\": [{\"graph\": \"" + data("split_graph.json") +
                                               "\", \"dist\": \"" + data("split_dist.json") + "\"}]}");
  auto r = invoke({"product", "--spec", spec.string(), "--steps", "10"});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(json::parse(r.err)["error"], "InfeasibleFactor");
}

TEST(Cli, CounterexampleSummary) {
  auto r = invoke({"counterexample", "--replicas", "50", "--steps", "2000"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["replicas"], 50);
  EXPECT_EQ(j["consistency_violations"], 0);
}

TEST(Cli, OutFileReceivesReport) {
  auto out = std::filesystem::temp_directory_path() / "gcmc_test_out.json";
  auto args = ends_args("classify");
  args.insert(args.end(), {"--out", out.string()});
  auto r = invoke(args);
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(out);
  EXPECT_EQ(json::parse(in)["case"], "SUPPORT_IN_ONE_COMPONENT");
}

// Reports on the two-atom instance are pinned byte for byte. The kernel and
// Dobrushin numbers in these files were checked by hand.
TEST(Cli, GoldenReports) {
  const std::string golden = GCMC_GOLDEN_DIR;
  auto slurp = [](const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::vector<std::pair<std::string, std::vector<std::string>>> cases{
      {"classify.json", {}},
      {"kernel_k4.json", {"--k", "4"}},
      {"dobrushin_k4.json", {"--k", "4"}},
      {"plan_paper.json", {"--schedule", "paper"}},
      {"plan_epsilon.json", {"--epsilon", "0.05"}},
      {"simulate_epsilon.json", {"--epsilon", "0.05", "--steps", "1000", "--checkpoints", "500"}},
  };
  for (const auto& [file, extra] : cases) {
    auto args = ends_args(file.substr(0, file.find_first_of("_.")));
    args.insert(args.end(), extra.begin(), extra.end());
    auto r = invoke(args);
    ASSERT_EQ(r.code, 0) << file << ": " << r.err;
    EXPECT_EQ(r.out, slurp(golden + "/" + file)) << file;
  }
}
