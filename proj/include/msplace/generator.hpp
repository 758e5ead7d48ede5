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

#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "msplace/model.hpp"

namespace msplace {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Random-scenario knobs. Value ranges default to the experimental setup:
/// payloads 0-2000 KB, capacities 100-400, service resources 1-3 units,
/// chain lengths 1-7, delays 1-10 ms, bandwidths 50-1000 MB/s. Server
/// resources and the cost cap default to auto-sizing relative to the
/// minimum deployment.
struct GeneratorConfig {
  std::uint64_t seed = 1;
  int n_servers = 5;
  int n_services = 23;
  int n_entries = 0;  // user requirement categories; 0 -> n_services / 4
  int user_count = 500;
  int chain_len_min = 1;
  int chain_len_max = 7;
  Range data_kb{0.0, 2000.0};
  Range mu{100.0, 400.0};
  Range service_resource{1.0, 3.0};
  Range delay_ms{1.0, 10.0};
  Range bandwidth_mbps{50.0, 1000.0};
  Range acfc{0.5, 2.0};
  Range server_resource{0.0, 0.0};   // drawn per server when hi > 0
  double server_resource_factor = 1.6;  // auto: total = factor * minimum
  double unit_cost = 1.0;
  double max_cost = 0.0;         // absolute cap; overrides the factor
  double max_cost_factor = 0.0;  // cap = factor * minimum cost; 0 -> unbound
};

namespace detail {

inline void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument("generator config: " + message);
}

inline std::string padded_id(char prefix, int value, int width) {
  std::string digits = std::to_string(value);
  while (static_cast<int>(digits.size()) < width) digits.insert(0, 1, '0');
  return prefix + digits;
}

inline int digits_of(int n) {
  int d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

}  // namespace detail

/// Generates a random scenario: one function per service, demanded entry
/// functions picked uniformly, and chain-shaped dependencies grown under the
/// pattern rule (once a function has a successor, every chain through it
/// follows that successor), which keeps the graph acyclic by construction.
/// Deterministic for a fixed config. Throws std::invalid_argument on bad
/// config values and on ranges that cannot yield a feasible scenario.
inline Scenario generate_scenario(const GeneratorConfig& cfg) {
  using detail::require;
  require(cfg.n_servers >= 1, "servers must be >= 1");
  require(cfg.n_services >= 1, "services must be >= 1");
  int n_entries = cfg.n_entries > 0 ? cfg.n_entries
                                    : std::max(1, cfg.n_services / 4);
  require(n_entries <= cfg.n_services, "entries must be <= services");
  require(cfg.user_count >= n_entries, "users must be >= entries");
  require(cfg.chain_len_min >= 1 && cfg.chain_len_min <= cfg.chain_len_max,
          "chain length range invalid");
  const std::pair<Range, const char*> ranges[] = {
      {cfg.data_kb, "data_kb"},
      {cfg.mu, "mu"},
      {cfg.service_resource, "service_resource"},
      {cfg.delay_ms, "delay_ms"},
      {cfg.bandwidth_mbps, "bandwidth_mbps"},
      {cfg.acfc, "acfc"}};
  for (const auto& [range, name] : ranges)
    require(range.lo <= range.hi, std::string(name) + " range inverted");
  require(cfg.mu.lo > 0, "mu must be positive");
  require(cfg.service_resource.lo > 0, "service resources must be positive");
  require(cfg.bandwidth_mbps.lo > 0, "bandwidth must be positive");
  require(cfg.data_kb.lo >= 0 && cfg.delay_ms.lo >= 0 && cfg.acfc.lo >= 0,
          "ranges must be non-negative");

  std::mt19937_64 rng(cfg.seed);
  auto draw = [&rng](const Range& r) {
    return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
  };

  Scenario s;
  const int swidth = detail::digits_of(cfg.n_services);
  for (int i = 1; i <= cfg.n_services; ++i) {
    ServiceSpec svc;
    svc.id = detail::padded_id('s', i, swidth);
    svc.mu = draw(cfg.mu);
    svc.resource = draw(cfg.service_resource);
    svc.functions.push_back({detail::padded_id('f', i, swidth),
                             draw(cfg.data_kb), draw(cfg.data_kb)});
    s.services.push_back(std::move(svc));
  }

  // Entry functions: uniform sample without replacement.
  std::vector<int> order(cfg.n_services);
  for (int i = 0; i < cfg.n_services; ++i) order[i] = i;
  for (int i = 0; i < n_entries; ++i) {
    std::uniform_int_distribution<int> pick(i, cfg.n_services - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<int> entries(order.begin(), order.begin() + n_entries);
  std::sort(entries.begin(), entries.end());

  // Dependency growth. succ[f] is the single successor the pattern rule
  // fixes for f; the graph is a forest with edges pointing at the roots, so
  // depth-to-root is the remaining chain length from any function.
  const int kMaxDepth = cfg.chain_len_max - 1;
  std::vector<int> succ(cfg.n_services, -1);
  std::vector<double> succ_acfc(cfg.n_services, 0.0);
  auto depth_of = [&](int f) {
    int d = 0;
    for (int v = succ[f]; v >= 0; v = succ[v]) ++d;
    return d;
  };
  auto root_of = [&](int f) {
    while (succ[f] >= 0) f = succ[f];
    return f;
  };
  auto height_above = [&](int root) {
    int h = 0;
    for (int f = 0; f < cfg.n_services; ++f)
      if (root_of(f) == root) h = std::max(h, depth_of(f));
    return h;
  };

  std::uniform_int_distribution<int> len_dist(cfg.chain_len_min,
                                              cfg.chain_len_max);
  for (int entry : entries) {
    const int target_len = len_dist(rng);
    while (depth_of(entry) + 1 < target_len) {
      const int tip = root_of(entry);
      const int budget = kMaxDepth - height_above(tip) - 1;
      std::vector<int> candidates;
      for (int f = 0; f < cfg.n_services; ++f)
        if (root_of(f) != tip && depth_of(f) <= budget)
          candidates.push_back(f);
      if (candidates.empty()) break;
      std::uniform_int_distribution<std::size_t> pick(0,
                                                      candidates.size() - 1);
      const int next = candidates[pick(rng)];
      succ[tip] = next;
      succ_acfc[tip] = draw(cfg.acfc);
    }
  }
  for (int f = 0; f < cfg.n_services; ++f)
    if (succ[f] >= 0)
      s.dependencies.edges.push_back({s.services[f].functions[0].id,
                                      s.services[succ[f]].functions[0].id,
                                      succ_acfc[f]});
  for (int entry : entries)
    s.dependencies.edges.push_back(
        {kUserNode, s.services[entry].functions[0].id, 1.0});

  // Users pick an entry uniformly (one seeded per entry so every category
  // is demanded); each entry's total splits over servers by random
  // proportions.
  std::vector<double> entry_rate(n_entries, 1.0);
  std::uniform_int_distribution<int> entry_pick(0, n_entries - 1);
  for (int u = n_entries; u < cfg.user_count; ++u)
    entry_rate[entry_pick(rng)] += 1.0;

  const int nwidth = detail::digits_of(cfg.n_servers);
  for (int j = 1; j <= cfg.n_servers; ++j)
    s.servers.push_back({detail::padded_id('n', j, nwidth), 1.0});

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int e = 0; e < n_entries; ++e) {
    std::vector<double> share(cfg.n_servers);
    double total = 0.0;
    for (int j = 0; j < cfg.n_servers; ++j) {
      share[j] = unit(rng);
      total += share[j];
    }
    for (int j = 0; j < cfg.n_servers; ++j)
      s.demand.entries.push_back({s.services[entries[e]].functions[0].id,
                                  s.servers[j].id,
                                  entry_rate[e] * share[j] / total});
  }

  // Size servers and the cost cap against the minimum deployment.
  std::vector<double> gamma(cfg.n_services, 0.0);
  for (int e = 0; e < n_entries; ++e) {
    double coe = 1.0;
    int f = entries[e];
    gamma[f] += entry_rate[e];
    while (succ[f] >= 0) {
      coe *= succ_acfc[f];
      f = succ[f];
      gamma[f] += coe * entry_rate[e];
    }
  }
  double min_units = 0.0;
  double max_instance = 0.0;
  for (int i = 0; i < cfg.n_services; ++i) {
    min_units += static_cast<double>(
                     min_instances(gamma[i], s.services[i].mu)) *
                 s.services[i].resource;
    max_instance = std::max(max_instance, s.services[i].resource);
  }

  double total_server_units = 0.0;
  if (cfg.server_resource.hi > 0) {
    for (auto& srv : s.servers) {
      srv.resource = draw(cfg.server_resource);
      total_server_units += srv.resource;
    }
  } else {
    require(cfg.server_resource_factor > 0,
            "server_resource_factor must be positive");
    const double per_server =
        min_units * cfg.server_resource_factor / cfg.n_servers;
    std::uniform_real_distribution<double> jitter(0.9, 1.1);
    for (auto& srv : s.servers) {
      srv.resource = std::max(per_server * jitter(rng), max_instance);
      total_server_units += srv.resource;
    }
  }
  require(total_server_units >= min_units,
          "total server resources below the minimum deployment");
  double best_server_units = 0.0;
  for (const auto& srv : s.servers)
    best_server_units = std::max(best_server_units, srv.resource);
  require(best_server_units >= max_instance,
          "no server fits the largest service instance");

  s.network.delay_ms.assign(cfg.n_servers,
                            std::vector<double>(cfg.n_servers, 0.0));
  s.network.bandwidth_mbps.assign(
      cfg.n_servers, std::vector<double>(cfg.n_servers, kIntraBandwidth));
  for (int i = 0; i < cfg.n_servers; ++i)
    for (int j = 0; j < cfg.n_servers; ++j) {
      if (i == j) continue;
      s.network.delay_ms[i][j] = draw(cfg.delay_ms);
      s.network.bandwidth_mbps[i][j] = draw(cfg.bandwidth_mbps);
    }

  s.cost.unit_cost = cfg.unit_cost;
  if (cfg.max_cost > 0)
    s.cost.max_cost = cfg.max_cost;
  else if (cfg.max_cost_factor > 0)
    s.cost.max_cost = cfg.max_cost_factor * cfg.unit_cost * min_units;
  else
    s.cost.max_cost = 2.0 * cfg.unit_cost * total_server_units;
  require(s.cost.max_cost >= cfg.unit_cost * min_units,
          "cost cap below the minimum deployment cost");

  return s;
}

// ---------------------------------------------------------------------------
// Config <-> JSON
// ---------------------------------------------------------------------------

inline GeneratorConfig generator_config_from_json(const nlohmann::ordered_json& j) {
  GeneratorConfig cfg;
  auto get_range = [&](const char* key, Range& out) {
    if (j.contains(key)) {
      out.lo = j.at(key).at(0).get<double>();
      out.hi = j.at(key).at(1).get<double>();
    }
  };
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("servers")) cfg.n_servers = j.at("servers").get<int>();
  if (j.contains("services")) cfg.n_services = j.at("services").get<int>();
  if (j.contains("entries")) cfg.n_entries = j.at("entries").get<int>();
  if (j.contains("users")) cfg.user_count = j.at("users").get<int>();
  if (j.contains("chain_len_min"))
    cfg.chain_len_min = j.at("chain_len_min").get<int>();
  if (j.contains("chain_len_max"))
    cfg.chain_len_max = j.at("chain_len_max").get<int>();
  get_range("data_kb", cfg.data_kb);
  get_range("mu", cfg.mu);
  get_range("service_resource", cfg.service_resource);
  get_range("delay_ms", cfg.delay_ms);
  get_range("bandwidth_mbps", cfg.bandwidth_mbps);
  get_range("acfc", cfg.acfc);
  get_range("server_resource", cfg.server_resource);
  if (j.contains("server_resource_factor"))
    cfg.server_resource_factor = j.at("server_resource_factor").get<double>();
  if (j.contains("unit_cost")) cfg.unit_cost = j.at("unit_cost").get<double>();
  if (j.contains("max_cost")) cfg.max_cost = j.at("max_cost").get<double>();
  if (j.contains("max_cost_factor"))
    cfg.max_cost_factor = j.at("max_cost_factor").get<double>();
  return cfg;
}

}  // namespace msplace
