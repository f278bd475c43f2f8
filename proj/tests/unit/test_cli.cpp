#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#ifndef LINLB_CLI_PATH
#error "LINLB_CLI_PATH must point at the linlb executable"
#endif

namespace {

std::string tmp(const std::string& name) { return ::testing::TempDir() + "linlb_cli_" + name; }

int run(const std::string& args) {
  const std::string cmd = std::string(LINLB_CLI_PATH) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("gen"), 1);
  EXPECT_EQ(run("gen --H 4 --variant mystery"), 1);
  EXPECT_EQ(run("lb-sweep --config /nonexistent.json"), 1);
  write(tmp("bad.json"), R"({"horizons": [4], "colour": "blue"})");
  EXPECT_EQ(run("lb-sweep --config " + tmp("bad.json")), 1);
}

TEST(Cli, GenIsReproducibleAndVerifies) {
  const std::string a = tmp("gen_a.json"), b = tmp("gen_b.json");
  ASSERT_EQ(run("--seed 7 --out " + a + " gen --variant value-lb --H 5 --features"), 0);
  ASSERT_EQ(run("--seed 7 --out " + b + " gen --variant value-lb --H 5 --features"), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  const auto doc = nlohmann::json::parse(slurp(a));
  EXPECT_EQ(doc["H"], 5);
  EXPECT_EQ(doc["provenance"]["seed"], 7);

  const std::string rep = tmp("verify.jsonl");
  EXPECT_EQ(run("--seed 1 --out " + rep + " verify --instance " + a + " --k 2"), 0);
  std::istringstream lines(slurp(rep));
  int n = 0;
  for (std::string line; std::getline(lines, line); ++n) {
    EXPECT_TRUE(nlohmann::json::parse(line)["pass"].get<bool>()) << line;
  }
  EXPECT_EQ(n, 4);
}

TEST(Cli, FailedVerificationExitsTwo) {
  const std::string inst = tmp("gen_fail.json");
  ASSERT_EQ(run("--seed 3 --out " + inst + " gen --variant value-lb --H 4 --features"), 0);
  // A tolerance far below the JL error cannot hold.
  EXPECT_EQ(run("verify --instance " + inst + " --assumption q-linear --delta 1e-6"), 2);
}

TEST(Cli, SweepFitRoundTrip) {
  const std::string cfg = tmp("sweep.json");
  write(cfg, R"({"horizons": [4, 5, 6], "learners": ["cheat", "uniform"], "seeds": 3, "seed": 11,
                 "verify": false})");
  const std::string a = tmp("sweep_a.csv"), b = tmp("sweep_b.csv"), m = tmp("sweep.jsonl");
  ASSERT_EQ(run("--out " + a + " lb-sweep --config " + cfg + " --mirror " + m), 0);
  ASSERT_EQ(run("--workers 2 --out " + b + " lb-sweep --config " + cfg), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(m).empty());

  const std::string f1 = tmp("fit_csv.json"), f2 = tmp("fit_jsonl.json");
  ASSERT_EQ(run("--out " + f1 + " fit --records " + a + " --learner uniform"), 0);
  ASSERT_EQ(run("--out " + f2 + " fit --records " + m + " --learner uniform"), 0);
  EXPECT_EQ(slurp(f1), slurp(f2));
  EXPECT_EQ(nlohmann::json::parse(slurp(f1))["medians"].size(), 3u);
}

TEST(Cli, IndqAndUbRun) {
  const std::string a = tmp("indq_a.jsonl"), b = tmp("indq_b.jsonl");
  ASSERT_EQ(run("--seed 5 --out " + a + " indq --n 64 --trials 20"), 0);
  ASSERT_EQ(run("--seed 5 --out " + b + " indq --n 64 --trials 20"), 0);
  EXPECT_EQ(slurp(a), slurp(b));

  const std::string inst = tmp("onehot.json"), out = tmp("ub.jsonl");
  ASSERT_EQ(run("--seed 2 --out " + inst + " gen --variant onehot --H 4"), 0);
  ASSERT_EQ(run("--seed 2 --format jsonl --out " + out + " ub-run --instance " + inst), 0);
  const auto rec = nlohmann::json::parse(slurp(out));
  EXPECT_TRUE(rec["success"].get<bool>());
  EXPECT_EQ(rec["learner"], "gap");
}

}  // namespace
