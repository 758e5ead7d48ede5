//
// Copyright 2026 msplace authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// End-to-end tests driving the built binary. The binary path comes from the
// MSPLACE_CLI environment variable (set by ctest).

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "msplace/json_io.hpp"
#include "test_support.hpp"

namespace msplace {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const char* cli = std::getenv("MSPLACE_CLI");
  EXPECT_NE(cli, nullptr) << "MSPLACE_CLI not set";
  const std::string cmd = std::string(cli) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  EXPECT_NE(pipe, nullptr);
  RunResult r;
  char buffer[4096];
  while (std::size_t n = fread(buffer, 1, sizeof buffer, pipe))
    r.output.append(buffer, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("msplace_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const {
    return (dir_ / name).string();
  }

  fs::path dir_;
};

TEST_F(CliTest, GenerateWritesValidScenario) {
  const auto r = run("generate --seed 1 --servers 5 --services 23 -o " +
                     path("scenario.json"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const Scenario s = load_scenario(path("scenario.json"));
  EXPECT_TRUE(validate_scenario(s).empty());
  EXPECT_EQ(s.servers.size(), 5u);
  EXPECT_EQ(s.services.size(), 23u);
}

TEST_F(CliTest, GenerateIsByteDeterministic) {
  ASSERT_EQ(run("generate --seed 5 -o " + path("a.json")).exit_code, 0);
  ASSERT_EQ(run("generate --seed 5 -o " + path("b.json")).exit_code, 0);
  EXPECT_EQ(read_file(path("a.json")), read_file(path("b.json")));
}

TEST_F(CliTest, GenerateRejectsBadFlags) {
  EXPECT_EQ(run("generate --servers 0 -o " + path("x.json")).exit_code, 2);
}

TEST_F(CliTest, SolveFeasibleScenarioExitsZero) {
  ASSERT_EQ(run("generate --seed 2 --servers 4 --services 10 -o " +
                path("s.json"))
                .exit_code,
            0);
  const auto r = run("solve " + path("s.json") +
                     " --algorithm bd-qsrfp -o " + path("result.json") +
                     " --scheme-out " + path("scheme.json"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto result = ordered_json::parse(read_file(path("result.json")));
  EXPECT_EQ(result.at("algorithm"), "bd-qsrfp");
  EXPECT_TRUE(result.at("feasible").get<bool>());
  EXPECT_GE(result.at("t_system_ms").get<double>(), 0.0);
  EXPECT_TRUE(result.contains("scheme"));
  EXPECT_TRUE(result.at("report").at("constraints_ok").get<bool>());

  // scheme file round-trips byte-identically
  const std::string text = read_file(path("scheme.json"));
  const Scenario s = load_scenario(path("s.json"));
  const ScenarioIndex ix(s);
  EXPECT_EQ(serialize_scheme(scheme_from_json(ordered_json::parse(text), ix),
                             ix),
            text);
}

TEST_F(CliTest, SolveInfeasibleScenarioExitsOne) {
  Scenario s = testing::two_tier();
  s.servers[0].resource = 0.5;  // nothing fits anywhere
  s.servers[1].resource = 0.5;
  write_file(path("starved.json"), serialize_scenario(s));
  const auto r = run("solve " + path("starved.json") + " --algorithm b-qsrfp");
  EXPECT_EQ(r.exit_code, 1);
}

TEST_F(CliTest, SolveRejectsInvalidInput) {
  write_file(path("broken.json"), "{\"services\": 3}");
  EXPECT_EQ(run("solve " + path("broken.json")).exit_code, 2);

  Scenario s = testing::two_tier();
  s.network.delay_ms[0][0] = 1.0;
  write_file(path("invalid.json"), serialize_scenario(s));
  const auto r = run("solve " + path("invalid.json"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("self-delay"), std::string::npos);
}

TEST_F(CliTest, ImproveNeverWorsens) {
  ASSERT_EQ(run("generate --seed 3 --servers 3 --services 8 -o " +
                path("s.json"))
                .exit_code,
            0);
  ASSERT_EQ(run("solve " + path("s.json") +
                " --algorithm b-qsrfp -o " + path("plain.json"))
                .exit_code,
            0);
  ASSERT_EQ(run("solve " + path("s.json") +
                " --algorithm b-qsrfp --improve -o " + path("improved.json"))
                .exit_code,
            0);
  const double plain = ordered_json::parse(read_file(path("plain.json")))
                           .at("t_system_ms")
                           .get<double>();
  const double improved = ordered_json::parse(read_file(path("improved.json")))
                              .at("t_system_ms")
                              .get<double>();
  EXPECT_LE(improved, plain);
}

TEST_F(CliTest, EvaluateModesAgree) {
  write_file(path("s.json"), serialize_scenario(testing::three_hop()));
  const ScenarioIndex ix(testing::three_hop());
  write_file(path("x.json"),
             serialize_scheme(testing::three_hop_scheme(), ix));
  const auto q = run("evaluate " + path("s.json") + " --scheme " +
                     path("x.json") + " --mode qsrfp -o " + path("q.json"));
  ASSERT_EQ(q.exit_code, 0) << q.output;
  const auto f = run("evaluate " + path("s.json") + " --scheme " +
                     path("x.json") + " --mode fpp -o " + path("f.json"));
  ASSERT_EQ(f.exit_code, 0) << f.output;
  const double tq = ordered_json::parse(read_file(path("q.json")))
                        .at("t_system_ms")
                        .get<double>();
  const double tf = ordered_json::parse(read_file(path("f.json")))
                        .at("t_system_ms")
                        .get<double>();
  EXPECT_TRUE(nearly_equal(tq, tf));
  EXPECT_TRUE(nearly_equal(tq, testing::kThreeHopExpectedMs));
}

TEST_F(CliTest, EvaluateFlagsConstraintViolations) {
  write_file(path("s.json"), serialize_scenario(testing::two_tier()));
  const ScenarioIndex ix(testing::two_tier());
  DeploymentScheme x = make_zero_scheme(2, 2);
  x.x[0][0] = 60;  // over n1's 10 resource units
  x.x[0][1] = 1;
  write_file(path("x.json"), serialize_scheme(x, ix));
  const auto r = run("evaluate " + path("s.json") + " --scheme " +
                     path("x.json") + " -o " + path("report.json"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto report = ordered_json::parse(read_file(path("report.json")));
  EXPECT_FALSE(report.at("constraints_ok").get<bool>());
  bool named = false;
  for (const auto& v : report.at("violations"))
    if (v.at("constraint") == "server-resource" && v.at("entity") == "n1")
      named = true;
  EXPECT_TRUE(named);
}

TEST_F(CliTest, EvaluateRejectsDimensionMismatch) {
  write_file(path("s.json"), serialize_scenario(testing::two_tier()));
  write_file(path("x.json"),
             R"({"x": [[1]], "servers": ["n1"], "services": ["s1"]})");
  EXPECT_EQ(run("evaluate " + path("s.json") + " --scheme " + path("x.json"))
                .exit_code,
            2);
}

TEST_F(CliTest, CompareProducesDeterministicCsv) {
  for (int seed : {1, 2, 3})
    ASSERT_EQ(run("generate --seed " + std::to_string(seed) +
                  " --servers 3 --services 8 -o " +
                  path("scn_" + std::to_string(seed) + ".json"))
                  .exit_code,
              0);
  const std::string cmd = "compare '" + (dir_ / "scn_*.json").string() +
                          "' --algorithms b-qsrfp,d-qsrfp,random --trials 10 "
                          "--seed 7 -o ";
  ASSERT_EQ(run(cmd + path("a.csv")).exit_code, 0);
  ASSERT_EQ(run(cmd + path("b.csv")).exit_code, 0);

  auto rows = [](const std::string& text) {
    std::vector<std::vector<std::string>> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
      std::vector<std::string> cells;
      std::istringstream ls(line);
      for (std::string cell; std::getline(ls, cell, ',');)
        cells.push_back(cell);
      out.push_back(cells);
    }
    return out;
  };
  const auto a = rows(read_file(path("a.csv")));
  const auto b = rows(read_file(path("b.csv")));
  ASSERT_EQ(a.size(), 10u);  // header + 3 scenarios x 3 algorithms
  ASSERT_EQ(a[0], (std::vector<std::string>{"seed", "algorithm", "t_ms",
                                            "wall_ms", "feasible",
                                            "instances"}));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].size(), b[i].size());
    for (std::size_t c = 0; c < a[i].size(); ++c) {
      if (c == 3) continue;  // wall_ms is wall-clock
      EXPECT_EQ(a[i][c], b[i][c]) << "row " << i << " col " << c;
    }
  }
}

TEST_F(CliTest, CompareRecordsFailedRowsAndContinues) {
  write_file(path("bad.json"), "not json");
  ASSERT_EQ(run("generate --seed 1 --servers 3 --services 6 -o " +
                path("good.json"))
                .exit_code,
            0);
  const auto r = run("compare " + path("bad.json") + " " + path("good.json") +
                     " --algorithms b-qsrfp -o " + path("out.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const std::string csv = read_file(path("out.csv"));
  EXPECT_NE(csv.find("bad,b-qsrfp,nan"), std::string::npos);
  EXPECT_NE(csv.find("good,b-qsrfp,"), std::string::npos);
}

}  // namespace
}  // namespace msplace
