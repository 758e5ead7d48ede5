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

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "msplace/chains.hpp"
#include "msplace/model.hpp"

namespace msplace {

inline constexpr long long kDefaultPathGuard = 10'000'000;

// ---------------------------------------------------------------------------
// Timing primitives
//
// All times are ms. Data is KB and bandwidth MB/s, so data/bandwidth is
// already ms (1 MB = 1000 KB). A same-server transfer costs nothing.
// ---------------------------------------------------------------------------

inline double transfer_time_ms(double data_kb, int from, int to,
                               const NetworkModel& net) {
  if (from == to) return 0.0;
  return data_kb / net.bandwidth_mbps[from][to] + net.delay_ms[from][to];
}

/// Time to call `callee` from `from_server` on an instance at `to_server`:
/// request plus response payload over the link bandwidth, plus delay.
inline double pair_transmission_time(const FunctionSpec& callee,
                                     int from_server, int to_server,
                                     const NetworkModel& net) {
  return transfer_time_ms(callee.d_in_kb + callee.d_out_kb, from_server,
                          to_server, net);
}

/// Round-robin probability that a request for `service` lands on `server`.
inline double instance_probability(const DeploymentScheme& x,
                                   const ScenarioIndex& ix, int service,
                                   int server) {
  const long long total = instance_total(x, service);
  if (total == 0) throw UndefinedRoutingError(ix.service_id(service));
  return static_cast<double>(x.x[server][service]) /
         static_cast<double>(total);
}

/// Round-robin distribution of `service` over servers.
inline std::vector<double> instance_distribution(const DeploymentScheme& x,
                                                 const ScenarioIndex& ix,
                                                 int service) {
  const long long total = instance_total(x, service);
  if (total == 0) throw UndefinedRoutingError(ix.service_id(service));
  std::vector<double> dist(ix.server_count());
  for (int k = 0; k < ix.server_count(); ++k)
    dist[k] = static_cast<double>(x.x[k][service]) /
              static_cast<double>(total);
  return dist;
}

/// Expected transfer time for one hop whose endpoints are placed according
/// to two independent server distributions.
inline double expected_pair_time(const std::vector<double>& from_dist,
                                 const std::vector<double>& to_dist,
                                 double data_kb, const NetworkModel& net) {
  double t = 0.0;
  for (std::size_t v = 0; v < from_dist.size(); ++v) {
    if (from_dist[v] == 0.0) continue;
    for (std::size_t w = 0; w < to_dist.size(); ++w) {
      if (to_dist[w] == 0.0) continue;
      t += from_dist[v] * to_dist[w] *
           transfer_time_ms(data_kb, static_cast<int>(v),
                            static_cast<int>(w), net);
    }
  }
  return t;
}

/// One concrete assignment of a server to every chain position, with its
/// round-robin selection probability and response time (origin hop folded
/// in as the demand-weighted expectation).
struct ResponsePath {
  std::vector<int> servers;
  double probability = 0.0;
  double time_ms = 0.0;
};

namespace detail {

// Per-position server distributions for a chain, deduplicated by service.
inline std::vector<const std::vector<double>*> chain_distributions(
    const FunctionChain& chain, const DeploymentScheme& x,
    const ScenarioIndex& ix,
    std::unordered_map<int, std::vector<double>>& cache) {
  std::vector<const std::vector<double>*> dist(chain.hops.size());
  for (std::size_t m = 0; m < chain.hops.size(); ++m) {
    const int svc = ix.service_of(chain.hops[m]);
    auto it = cache.find(svc);
    if (it == cache.end())
      it = cache.emplace(svc, instance_distribution(x, ix, svc)).first;
    dist[m] = &it->second;
  }
  return dist;
}

// User-origin distribution of the entry function (normalized per-server
// rates); empty when the entry has no demand.
inline std::vector<double> origin_distribution(const FunctionChain& chain,
                                               const ScenarioIndex& ix) {
  const double total = ix.demand_total(chain.entry);
  if (total <= 0.0) return {};
  std::vector<double> dist(ix.server_count());
  for (int k = 0; k < ix.server_count(); ++k)
    dist[k] = ix.demand(chain.entry, k) / total;
  return dist;
}

// Depth-first walk over every response server path with non-zero
// probability. visit(servers, probability, time_ms) runs once per path;
// time_ms already includes the expected origin hop. Throws when |N|^|L|
// exceeds the guard.
template <typename Visit>
void walk_response_paths(const FunctionChain& chain, const DeploymentScheme& x,
                         const ScenarioIndex& ix, long long guard,
                         Visit&& visit) {
  const int n_servers = ix.server_count();
  const std::size_t length = chain.hops.size();
  long double states = 1.0L;
  for (std::size_t m = 0; m < length; ++m) states *= n_servers;
  if (states > static_cast<long double>(guard))
    throw EnumerationGuardError(
        "path enumeration too large: |N|^|L| exceeds guard");

  std::unordered_map<int, std::vector<double>> cache;
  const auto dist = chain_distributions(chain, x, ix, cache);
  const auto& net = ix.network();

  // Expected user->first-server time as a function of the first server.
  std::vector<double> origin_time(n_servers, 0.0);
  const auto origin = origin_distribution(chain, ix);
  if (!origin.empty()) {
    const double entry_data = ix.data_kb(chain.entry);
    for (int v = 0; v < n_servers; ++v)
      for (int k = 0; k < n_servers; ++k)
        if (origin[k] > 0.0)
          origin_time[v] += origin[k] * transfer_time_ms(entry_data, k, v, net);
  }

  std::vector<double> hop_data(length, 0.0);
  for (std::size_t m = 1; m < length; ++m)
    hop_data[m] = chain.virtual_link[m - 1] ? 0.0 : ix.data_kb(chain.hops[m]);

  std::vector<int> path(length, 0);
  auto walk = [&](auto&& self, std::size_t pos, double prob,
                  double inner) -> void {
    if (pos == length) {
      visit(path, prob, inner + origin_time[path[0]]);
      return;
    }
    for (int w = 0; w < n_servers; ++w) {
      const double p = (*dist[pos])[w];
      if (p == 0.0) continue;
      path[pos] = w;
      const double step =
          pos == 0 ? 0.0
                   : transfer_time_ms(hop_data[pos], path[pos - 1], w, net);
      self(self, pos + 1, prob * p, inner + step);
    }
  };
  walk(walk, 0, 1.0, 0.0);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Chain response time, two independent routes
// ---------------------------------------------------------------------------

/// Efficient per-hop decomposition: the chain's expected response time is the
/// sum over consecutive position pairs of the expected pair time, because
/// hops select servers independently under round robin. O(|L| * |N|^2).
///
/// Position 0 is the user origin, weighted by the entry's per-server demand
/// distribution; it moves the entry function's own payload. A chain whose
/// entry has zero demand contributes no origin term.
inline double chain_average_time_qsrfp(const FunctionChain& chain,
                                       const DeploymentScheme& x,
                                       const ScenarioIndex& ix) {
  std::unordered_map<int, std::vector<double>> cache;
  const auto dist = detail::chain_distributions(chain, x, ix, cache);
  const auto& net = ix.network();

  double t = 0.0;
  const auto origin = detail::origin_distribution(chain, ix);
  if (!origin.empty())
    t += expected_pair_time(origin, *dist[0], ix.data_kb(chain.entry), net);
  for (std::size_t m = 0; m + 1 < chain.hops.size(); ++m) {
    const double data =
        chain.virtual_link[m] ? 0.0 : ix.data_kb(chain.hops[m + 1]);
    t += expected_pair_time(*dist[m], *dist[m + 1], data, net);
  }
  return t;
}

/// Exact expectation by enumerating every response server path (one server
/// per chain position) with its selection probability. |N|^|L| paths; guarded.
/// This is the oracle route the decomposition is checked against.
inline double chain_average_time_fpp(const FunctionChain& chain,
                                     const DeploymentScheme& x,
                                     const ScenarioIndex& ix,
                                     long long guard = kDefaultPathGuard) {
  double total = 0.0;
  detail::walk_response_paths(
      chain, x, ix, guard,
      [&](const std::vector<int>&, double prob, double time_ms) {
        total += prob * time_ms;
      });
  return total;
}

/// Materialized response paths for inspection and tests. Memory grows with
/// |N|^|L|, hence the small default guard; the streaming fpp evaluation
/// above is the one to use for scoring.
inline std::vector<ResponsePath> enumerate_response_paths(
    const FunctionChain& chain, const DeploymentScheme& x,
    const ScenarioIndex& ix, long long guard = 100'000) {
  std::vector<ResponsePath> paths;
  detail::walk_response_paths(
      chain, x, ix, guard,
      [&](const std::vector<int>& servers, double prob, double time_ms) {
        paths.push_back({servers, prob, time_ms});
      });
  return paths;
}

enum class EvalMode { kQsrfp, kFpp };

inline const char* to_string(EvalMode m) {
  return m == EvalMode::kQsrfp ? "qsrfp" : "fpp";
}

// ---------------------------------------------------------------------------
// Constraints
// ---------------------------------------------------------------------------

/// Checks server resources, deployment cost, and per-service capability.
/// Empty result means feasible. Margins are the amounts by which the limits
/// are exceeded.
inline std::vector<Violation> check_constraints(const DeploymentScheme& x,
                                                const ScenarioIndex& ix,
                                                const DemandSummary& demand) {
  std::vector<Violation> out;
  for (int j = 0; j < ix.server_count(); ++j) {
    const double used = server_load(x, ix, j);
    if (used > ix.server_resource(j))
      out.push_back({"server-resource", ix.server_id(j),
                     used - ix.server_resource(j)});
  }
  const double cost = deployment_cost(x, ix);
  if (cost > ix.max_cost())
    out.push_back({"cost", "", cost - ix.max_cost()});
  for (int i = 0; i < ix.service_count(); ++i) {
    const double capability =
        ix.mu(i) * static_cast<double>(instance_total(x, i));
    const double need = demand.total(i);
    if (capability < need)
      out.push_back({"capability", ix.service_id(i), need - capability});
  }
  return out;
}

// ---------------------------------------------------------------------------
// System objective
// ---------------------------------------------------------------------------

/// Demand-weighted average response time over all demanded functions, plus
/// the per-function breakdown and constraint status. Chains are evaluated in
/// entry-id order so the sum is reproducible bit for bit.
inline EvaluationReport system_average_time(
    const DeploymentScheme& x, const ScenarioIndex& ix,
    const std::vector<FunctionChain>& chains, EvalMode mode,
    long long fpp_guard = kDefaultPathGuard) {
  EvaluationReport report;
  const DemandSummary demand = demand_summary(ix, chains);
  report.violations = check_constraints(x, ix, demand);
  report.constraints_ok = report.violations.empty();

  const double grand = ix.demand_grand_total();
  if (grand <= 0.0) {
    report.warnings.push_back("zero total demand: T(X) defined as 0");
    return report;
  }
  for (const auto& chain : chains) {
    const double t = mode == EvalMode::kQsrfp
                         ? chain_average_time_qsrfp(chain, x, ix)
                         : chain_average_time_fpp(chain, x, ix, fpp_guard);
    report.per_function.emplace_back(ix.function_id(chain.entry), t);
    report.t_system_ms += ix.demand_total(chain.entry) / grand * t;
  }
  return report;
}

}  // namespace msplace
