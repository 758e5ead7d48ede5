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

#include "msplace/generator.hpp"

#include <gtest/gtest.h>

#include "msplace/chains.hpp"
#include "msplace/json_io.hpp"

namespace msplace {
namespace {

TEST(Generator, DeterministicPerSeed) {
  GeneratorConfig cfg;
  cfg.seed = 99;
  cfg.n_servers = 4;
  cfg.n_services = 12;
  cfg.user_count = 200;
  const Scenario a = generate_scenario(cfg);
  const Scenario b = generate_scenario(cfg);
  EXPECT_EQ(a, b);
  EXPECT_EQ(serialize_scenario(a), serialize_scenario(b));

  cfg.seed = 100;
  EXPECT_NE(generate_scenario(cfg), a);
}

TEST(Generator, MirrorsExperimentShape) {
  GeneratorConfig cfg;
  cfg.seed = 1;
  const Scenario s = generate_scenario(cfg);  // defaults: 5 servers, 23 services
  EXPECT_EQ(s.servers.size(), 5u);
  EXPECT_EQ(s.services.size(), 23u);
  for (const auto& svc : s.services) EXPECT_EQ(svc.functions.size(), 1u);
  const ScenarioIndex ix(s);
  EXPECT_EQ(ix.demanded_functions().size(), 5u);  // 23 / 4
  EXPECT_TRUE(validate_scenario(s).empty());
}

TEST(Generator, ValuesStayInsideConfiguredRanges) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    GeneratorConfig cfg;
    cfg.seed = seed;
    cfg.n_servers = 3 + static_cast<int>(seed % 3);
    cfg.n_services = 5 + static_cast<int>(seed % 9);
    cfg.user_count = 150;
    const Scenario s = generate_scenario(cfg);
    for (const auto& svc : s.services) {
      EXPECT_GE(svc.mu, cfg.mu.lo);
      EXPECT_LE(svc.mu, cfg.mu.hi);
      EXPECT_GE(svc.resource, cfg.service_resource.lo);
      EXPECT_LE(svc.resource, cfg.service_resource.hi);
      for (const auto& fn : svc.functions) {
        EXPECT_GE(fn.d_in_kb, cfg.data_kb.lo);
        EXPECT_LE(fn.d_in_kb, cfg.data_kb.hi);
        EXPECT_GE(fn.d_out_kb, cfg.data_kb.lo);
        EXPECT_LE(fn.d_out_kb, cfg.data_kb.hi);
      }
    }
    const int n = static_cast<int>(s.servers.size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        EXPECT_GE(s.network.delay_ms[i][j], cfg.delay_ms.lo);
        EXPECT_LE(s.network.delay_ms[i][j], cfg.delay_ms.hi);
        EXPECT_GE(s.network.bandwidth_mbps[i][j], cfg.bandwidth_mbps.lo);
        EXPECT_LE(s.network.bandwidth_mbps[i][j], cfg.bandwidth_mbps.hi);
      }
    for (const auto& e : s.dependencies.edges) {
      if (e.from == kUserNode) continue;
      EXPECT_GE(e.acfc, cfg.acfc.lo);
      EXPECT_LE(e.acfc, cfg.acfc.hi);
    }
    double rate_total = 0.0;
    for (const auto& d : s.demand.entries) {
      EXPECT_GE(d.rate, 0.0);
      rate_total += d.rate;
    }
    EXPECT_NEAR(rate_total, cfg.user_count, 1e-6);
  }
}

TEST(Generator, GraphsAreAcyclicAndChainsBounded) {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    GeneratorConfig cfg;
    cfg.seed = seed;
    cfg.n_servers = 2 + static_cast<int>(seed % 4);
    cfg.n_services = 4 + static_cast<int>(seed % 12);
    cfg.user_count = 100;
    const Scenario s = generate_scenario(cfg);
    const auto errors = validate_scenario(s);
    ASSERT_TRUE(errors.empty()) << "seed " << seed << ": " << errors[0];
    const ScenarioIndex ix(s);
    for (const auto& chain : build_demanded_chains(ix)) {
      EXPECT_GE(chain.hops.size(), 1u);
      EXPECT_LE(chain.hops.size(), 7u) << "seed " << seed;
      for (bool v : chain.virtual_link) EXPECT_FALSE(v);  // chains, no branches
    }
  }
}

TEST(Generator, UserEdgesMarkDemandedEntries) {
  GeneratorConfig cfg;
  cfg.seed = 4;
  cfg.n_services = 10;
  cfg.n_entries = 3;
  cfg.user_count = 90;
  const Scenario s = generate_scenario(cfg);
  const ScenarioIndex ix(s);
  std::set<std::string> user_targets;
  for (const auto& e : s.dependencies.edges)
    if (e.from == kUserNode) user_targets.insert(e.to);
  EXPECT_EQ(user_targets.size(), 3u);
  for (int f : ix.demanded_functions())
    EXPECT_TRUE(user_targets.count(ix.function_id(f)));
}

TEST(Generator, RespectsExplicitServerResourcesAndCost) {
  GeneratorConfig cfg;
  cfg.seed = 6;
  cfg.n_servers = 3;
  cfg.n_services = 6;
  cfg.user_count = 100;
  cfg.server_resource = {40.0, 60.0};
  cfg.max_cost_factor = 1.3;
  const Scenario s = generate_scenario(cfg);
  for (const auto& srv : s.servers) {
    EXPECT_GE(srv.resource, 40.0);
    EXPECT_LE(srv.resource, 60.0);
  }
  EXPECT_GT(s.cost.max_cost, 0.0);
}

TEST(Generator, RejectsBadConfig) {
  GeneratorConfig cfg;
  cfg.n_servers = 0;
  EXPECT_THROW(generate_scenario(cfg), std::invalid_argument);

  cfg = {};
  cfg.n_entries = 5;
  cfg.user_count = 3;  // fewer users than categories
  EXPECT_THROW(generate_scenario(cfg), std::invalid_argument);

  cfg = {};
  cfg.chain_len_min = 5;
  cfg.chain_len_max = 2;
  EXPECT_THROW(generate_scenario(cfg), std::invalid_argument);

  cfg = {};
  cfg.mu = {400.0, 100.0};  // inverted
  EXPECT_THROW(generate_scenario(cfg), std::invalid_argument);
}

TEST(Generator, ReportsInfeasibleResourceRanges) {
  GeneratorConfig cfg;
  cfg.seed = 3;
  cfg.n_servers = 2;
  cfg.n_services = 10;
  cfg.user_count = 500;
  cfg.server_resource = {1.0, 2.0};  // nowhere near the minimum deployment
  EXPECT_THROW(generate_scenario(cfg), std::invalid_argument);
}

TEST(Generator, ConfigFromJsonOverridesDefaults) {
  const auto j = ordered_json::parse(R"({
    "seed": 7, "servers": 3, "services": 9, "users": 120,
    "mu": [200, 300], "acfc": [1.0, 1.0], "max_cost_factor": 1.5
  })");
  const GeneratorConfig cfg = generator_config_from_json(j);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.n_servers, 3);
  EXPECT_EQ(cfg.n_services, 9);
  EXPECT_EQ(cfg.user_count, 120);
  EXPECT_DOUBLE_EQ(cfg.mu.lo, 200.0);
  EXPECT_DOUBLE_EQ(cfg.mu.hi, 300.0);
  EXPECT_DOUBLE_EQ(cfg.acfc.lo, 1.0);
  EXPECT_DOUBLE_EQ(cfg.max_cost_factor, 1.5);
  const Scenario s = generate_scenario(cfg);
  EXPECT_EQ(s.services.size(), 9u);
}

}  // namespace
}  // namespace msplace
