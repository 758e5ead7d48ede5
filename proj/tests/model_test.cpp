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

#include "msplace/model.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "msplace/generator.hpp"
#include "msplace/json_io.hpp"
#include "test_support.hpp"

namespace msplace {
namespace {

using testing::two_tier;

bool has_error(const std::vector<std::string>& errors,
               const std::string& needle) {
  return std::any_of(errors.begin(), errors.end(), [&](const auto& e) {
    return e.find(needle) != std::string::npos;
  });
}

TEST(Validate, WellFormedScenarioPasses) {
  EXPECT_TRUE(validate_scenario(two_tier()).empty());
}

TEST(Validate, DependencyCycleRejected) {
  Scenario s = two_tier();
  s.dependencies.edges.push_back({"f2", "f1", 1.0});
  EXPECT_TRUE(has_error(validate_scenario(s), "dependency graph cyclic"));
}

TEST(Validate, SelfDelayMustBeZero) {
  Scenario s = two_tier();
  s.network.delay_ms[0][0] = 3.0;
  EXPECT_TRUE(has_error(validate_scenario(s), "self-delay must be zero"));
}

TEST(Validate, BandwidthDiagonalMustBeIntra) {
  Scenario s = two_tier();
  s.network.bandwidth_mbps[1][1] = 100.0;
  EXPECT_TRUE(has_error(validate_scenario(s), "INTRA"));
}

TEST(Validate, FieldInvariants) {
  Scenario s = two_tier();
  s.services[0].mu = 0.0;
  EXPECT_TRUE(has_error(validate_scenario(s), "mu must be positive"));

  s = two_tier();
  s.services[0].functions[0].d_in_kb = -1.0;
  EXPECT_TRUE(has_error(validate_scenario(s), "d_in must be non-negative"));

  s = two_tier();
  s.services[1].functions.clear();
  EXPECT_TRUE(has_error(validate_scenario(s), "functions must be non-empty"));

  s = two_tier();
  s.services[1].functions[0].id = "f1";  // collides with s1's function
  EXPECT_TRUE(has_error(validate_scenario(s), "duplicate id"));

  s = two_tier();
  s.cost.max_cost = 0.0;
  EXPECT_TRUE(has_error(validate_scenario(s), "max_cost"));
}

TEST(Validate, EdgeEndpointsChecked) {
  Scenario s = two_tier();
  s.dependencies.edges.push_back({"f1", "nope", 1.0});
  EXPECT_TRUE(has_error(validate_scenario(s), "unknown callee"));

  s = two_tier();
  s.dependencies.edges.push_back({"f1", kUserNode, 1.0});
  EXPECT_TRUE(has_error(validate_scenario(s), "USER cannot receive calls"));

  s = two_tier();
  s.dependencies.edges.push_back({kUserNode, "f1", 1.0});
  EXPECT_TRUE(validate_scenario(s).empty());  // USER as caller is fine

  s = two_tier();
  s.dependencies.edges.push_back({"f1", "f2", 2.0});  // already present
  EXPECT_TRUE(has_error(validate_scenario(s), "duplicate edge"));

  s = two_tier();
  s.dependencies.edges[0].acfc = -0.5;
  EXPECT_TRUE(has_error(validate_scenario(s), "acfc"));
}

TEST(Validate, DemandChecked) {
  Scenario s = two_tier();
  s.demand.entries.push_back({"f9", "n1", 1.0});
  EXPECT_TRUE(has_error(validate_scenario(s), "unknown function"));

  s = two_tier();
  s.demand.entries.push_back({"f1", "n2", 3.0});  // duplicate pair
  EXPECT_TRUE(has_error(validate_scenario(s), "duplicate entry"));

  s = two_tier();
  s.demand.entries[0].rate = -2.0;
  EXPECT_TRUE(has_error(validate_scenario(s), "rate must be non-negative"));
}

TEST(Validate, MatrixShapeChecked) {
  Scenario s = two_tier();
  s.network.delay_ms.pop_back();
  EXPECT_TRUE(has_error(validate_scenario(s), "row count"));
}

TEST(Validate, IsPureAndDeterministic) {
  Scenario s = two_tier();
  s.network.delay_ms[0][0] = 3.0;
  const Scenario copy = s;
  const auto first = validate_scenario(s);
  const auto second = validate_scenario(s);
  EXPECT_EQ(first, second);
  EXPECT_EQ(s, copy);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

TEST(ScenarioJson, ValueRoundTrip) {
  const Scenario s = two_tier();
  EXPECT_EQ(parse_scenario(serialize_scenario(s)), s);
}

TEST(ScenarioJson, ByteRoundTrip) {
  const Scenario s = two_tier();
  const std::string text = serialize_scenario(s);
  EXPECT_EQ(serialize_scenario(parse_scenario(text)), text);
}

TEST(ScenarioJson, GeneratedScenariosRoundTrip) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    GeneratorConfig cfg;
    cfg.seed = seed;
    cfg.n_servers = 2 + seed % 4;
    cfg.n_services = 3 + seed % 7;
    cfg.user_count = 60;
    const Scenario s = generate_scenario(cfg);
    EXPECT_EQ(parse_scenario(serialize_scenario(s)), s) << "seed " << seed;
    const std::string text = serialize_scenario(s);
    EXPECT_EQ(serialize_scenario(parse_scenario(text)), text)
        << "seed " << seed;
  }
}

TEST(ScenarioJson, IntraBandwidthSerializesAsNull) {
  const auto j = scenario_to_json(two_tier());
  EXPECT_TRUE(j.at("network").at("bandwidth_mbps").at(0).at(0).is_null());
  EXPECT_DOUBLE_EQ(
      j.at("network").at("bandwidth_mbps").at(0).at(1).get<double>(), 1000.0);
}

TEST(ScenarioJson, MalformedInputThrows) {
  EXPECT_THROW(parse_scenario("not json"), ParseError);
  EXPECT_THROW(parse_scenario("{}"), ParseError);
}

TEST(SchemeJson, RoundTripAndAlignment) {
  const Scenario s = two_tier();
  const ScenarioIndex ix(s);
  DeploymentScheme x = make_zero_scheme(2, 2);
  x.x[0][1] = 3;
  x.x[1][0] = 2;
  EXPECT_EQ(scheme_from_json(scheme_to_json(x, ix), ix), x);

  // column/row order differing from the scenario is realigned by id
  ordered_json j;
  j["x"] = {{7, 0}, {0, 1}};
  j["servers"] = {"n2", "n1"};
  j["services"] = {"s2", "s1"};
  const DeploymentScheme aligned = scheme_from_json(j, ix);
  EXPECT_EQ(aligned.x[1][1], 7);  // s2 on n2
  EXPECT_EQ(aligned.x[0][0], 1);  // s1 on n1
}

TEST(SchemeJson, DimensionMismatchThrows) {
  const ScenarioIndex ix(two_tier());
  ordered_json j;
  j["x"] = {{1}};
  j["servers"] = {"n1"};
  j["services"] = {"s1"};
  EXPECT_THROW(scheme_from_json(j, ix), ParseError);
}

TEST(SchemeJson, DuplicateLabelsRejected) {
  const ScenarioIndex ix(two_tier());
  ordered_json j;
  j["x"] = {{1, 0}, {0, 1}};
  j["servers"] = {"n1", "n1"};
  j["services"] = {"s1", "s2"};
  EXPECT_THROW(scheme_from_json(j, ix), ParseError);
}

// ---------------------------------------------------------------------------
// ScenarioIndex and resource folds
// ---------------------------------------------------------------------------

TEST(ScenarioIndex, ResolvesIdsAndDemand) {
  const Scenario s = two_tier();
  const ScenarioIndex ix(s);
  EXPECT_EQ(ix.service_count(), 2);
  EXPECT_EQ(ix.server_count(), 2);
  EXPECT_EQ(ix.function_count(), 2);
  EXPECT_EQ(ix.service_of(ix.function_index("f2")), ix.service_index("s2"));
  EXPECT_DOUBLE_EQ(ix.demand_total(ix.function_index("f1")), 5.0);
  EXPECT_DOUBLE_EQ(ix.demand_grand_total(), 5.0);
  ASSERT_EQ(ix.demanded_functions().size(), 1u);
  EXPECT_THROW(ix.service_index("zzz"), std::invalid_argument);
}

TEST(ScenarioIndex, ServiceAdjacencyExcludesUserAndSelf) {
  Scenario s = two_tier();
  s.dependencies.edges.push_back({kUserNode, "f1", 1.0});
  const ScenarioIndex ix(s);
  const int s1 = ix.service_index("s1");
  const int s2 = ix.service_index("s2");
  EXPECT_TRUE(ix.service_preds(s1).empty());
  ASSERT_EQ(ix.service_succs(s1).size(), 1u);
  EXPECT_EQ(ix.service_succs(s1)[0], s2);
  ASSERT_EQ(ix.service_preds(s2).size(), 1u);
  ASSERT_EQ(ix.service_links(s1).size(), 1u);
  EXPECT_FALSE(ix.service_links(s1)[0].incoming);
  EXPECT_EQ(ix.service_links(s1)[0].callee_fn, ix.function_index("f2"));
}

TEST(ResourceFolds, LoadCostAndFit) {
  const Scenario s = two_tier();
  const ScenarioIndex ix(s);
  DeploymentScheme x = make_zero_scheme(2, 2);
  x.x[0][0] = 3;
  x.x[0][1] = 2;
  EXPECT_DOUBLE_EQ(server_load(x, ix, 0), 5.0);
  EXPECT_DOUBLE_EQ(server_load(x, ix, 0, 1, 2), 7.0);
  EXPECT_DOUBLE_EQ(deployment_cost(x, ix), 5.0);
  EXPECT_EQ(max_additional_fit(x, ix, 0, 0), 5);  // capacity 10, used 5, r=1
  EXPECT_EQ(max_additional_fit(x, ix, 1, 0), 10);
  EXPECT_EQ(instance_total(x, 0), 3);
  EXPECT_EQ(total_instances(x), 5);
}

}  // namespace
}  // namespace msplace
