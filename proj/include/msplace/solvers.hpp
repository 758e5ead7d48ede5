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
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "msplace/chains.hpp"
#include "msplace/evaluator.hpp"
#include "msplace/model.hpp"

namespace msplace {

/// Scenario with its derived artifacts built once: the compiled index, the
/// cached chain per demanded function, and the per-service demand totals.
struct PreparedScenario {
  ScenarioIndex index;
  std::vector<FunctionChain> chains;
  DemandSummary demand;

  explicit PreparedScenario(const Scenario& s)
      : index(s),
        chains(build_demanded_chains(index)),
        demand(demand_summary(index, chains)) {}
};

enum class ServiceOrder { kPseudocode, kProse };

struct SolveOptions {
  bool improve = false;
  ServiceOrder service_order = ServiceOrder::kPseudocode;
  std::uint64_t seed = 1;
  int trials = 100;
  long long guard = kDefaultPathGuard;
};

struct SolverResult {
  DeploymentScheme scheme;
  double t_system_ms = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
  std::string algorithm;
  bool feasible = false;
  std::string service_order;  // recorded for b-qsrfp / bd-qsrfp
  std::string error;          // non-empty when the run aborted
  // random baseline extras
  double t_best_ms = std::numeric_limits<double>::quiet_NaN();
  double t_variance = 0.0;
  int feasible_trials = 0;
};

// ---------------------------------------------------------------------------
// Candidate server selection
// ---------------------------------------------------------------------------

/// Best server for one new instance of `service`: among servers with room,
/// the one minimizing the summed expected pair time to every deployed
/// predecessor and successor, scored as if the instance were already placed
/// there. Neighbors without instances contribute zero. Ties go to the
/// smallest server id. Returns -1 when no server has room.
inline int best_server(int service, const DeploymentScheme& x,
                       const ScenarioIndex& ix) {
  const auto& net = ix.network();
  const int n_servers = ix.server_count();
  const long long self_total = instance_total(x, service);

  // Neighbor distributions are independent of the candidate; build lazily.
  std::unordered_map<int, std::vector<double>> nbr_dist;
  auto neighbor_distribution =
      [&](int nbr) -> const std::vector<double>* {
    auto it = nbr_dist.find(nbr);
    if (it == nbr_dist.end()) {
      if (instance_total(x, nbr) == 0) return nullptr;
      it = nbr_dist.emplace(nbr, instance_distribution(x, ix, nbr)).first;
    }
    return it->second.empty() ? nullptr : &it->second;
  };

  int best = -1;
  double best_score = std::numeric_limits<double>::infinity();
  std::vector<double> self_dist(n_servers);
  for (int n : ix.servers_by_id()) {
    if (max_additional_fit(x, ix, n, service) < 1) continue;
    const double denom = static_cast<double>(self_total + 1);
    for (int k = 0; k < n_servers; ++k)
      self_dist[k] =
          (static_cast<double>(x.x[k][service]) + (k == n ? 1.0 : 0.0)) /
          denom;
    double score = 0.0;
    for (const auto& link : ix.service_links(service)) {
      const std::vector<double>* nbr = neighbor_distribution(link.neighbor);
      if (nbr == nullptr) continue;
      const double data = ix.data_kb(link.callee_fn);
      score += link.incoming
                   ? expected_pair_time(*nbr, self_dist, data, net)
                   : expected_pair_time(self_dist, *nbr, data, net);
    }
    if (score < best_score) {
      best = n;
      best_score = score;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Instance deployment with neighbor re-placement
// ---------------------------------------------------------------------------

/// Deploys `k` instances of `service`, batching as many as fit per
/// best_server pick. After each batch, deployed predecessors and successors
/// are deleted and re-placed; whenever a re-placement moved a service, its
/// own neighbors join the ripple, with a processed set preventing revisits.
/// Throws InsufficientCapacityError when no server can host an instance.
inline void deploy_spread(int service, long long k, DeploymentScheme& x,
                          const ScenarioIndex& ix) {
  auto add_neighbors = [&](int svc, std::set<int>& ripple,
                           const std::set<int>& processed) {
    for (const auto* list : {&ix.service_preds(svc), &ix.service_succs(svc)})
      for (int nbr : *list) {
        const int rank = ix.service_rank(nbr);
        if (!processed.count(rank)) ripple.insert(rank);
      }
  };

  while (k > 0) {
    const int n = best_server(service, x, ix);
    if (n < 0) throw InsufficientCapacityError(ix.service_id(service));
    const long long batch = std::min(max_additional_fit(x, ix, n, service), k);
    x.x[n][service] += batch;
    k -= batch;

    std::set<int> ripple;
    std::set<int> processed{ix.service_rank(service)};
    add_neighbors(service, ripple, processed);
    while (!ripple.empty()) {
      const int rank = *ripple.begin();
      ripple.erase(ripple.begin());
      const int svc = ix.services_by_id()[rank];
      const long long count = instance_total(x, svc);
      if (count == 0) continue;

      std::vector<long long> before(ix.server_count());
      for (int j = 0; j < ix.server_count(); ++j) {
        before[j] = x.x[j][svc];
        x.x[j][svc] = 0;
      }
      long long placed = 0;
      while (placed < count) {
        const int target = best_server(svc, x, ix);
        if (target < 0) throw InsufficientCapacityError(ix.service_id(svc));
        const long long fit = std::min(max_additional_fit(x, ix, target, svc),
                                       count - placed);
        x.x[target][svc] += fit;
        placed += fit;
      }
      bool moved = false;
      for (int j = 0; j < ix.server_count() && !moved; ++j)
        moved = x.x[j][svc] != before[j];
      if (moved) {
        add_neighbors(svc, ripple, processed);
        processed.insert(rank);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Result assembly
// ---------------------------------------------------------------------------

namespace detail {

inline void finalize_result(SolverResult& r, const ScenarioIndex& ix,
                            const std::vector<FunctionChain>& chains,
                            const DemandSummary& demand) {
  r.feasible =
      r.error.empty() && check_constraints(r.scheme, ix, demand).empty();
  try {
    r.t_system_ms =
        system_average_time(r.scheme, ix, chains, EvalMode::kQsrfp)
            .t_system_ms;
  } catch (const UndefinedRoutingError& e) {
    r.t_system_ms = std::numeric_limits<double>::quiet_NaN();
    if (r.error.empty()) r.error = e.what();
    r.feasible = false;
  }
}

inline const char* to_string(ServiceOrder o) {
  return o == ServiceOrder::kPseudocode ? "pseudocode" : "prose";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Improvement pass
// ---------------------------------------------------------------------------

/// Greedily adds single instances at the (service, server) pair giving the
/// largest strict decrease of T(X) while server resources and the cost
/// budget still hold. The input must be feasible; the result stays feasible
/// and T never increases.
inline DeploymentScheme improvement_pass(const DeploymentScheme& start,
                                         const ScenarioIndex& ix,
                                         const std::vector<FunctionChain>& chains) {
  DeploymentScheme x = start;
  const double grand = ix.demand_grand_total();
  if (chains.empty() || grand <= 0.0) return x;

  std::vector<std::vector<int>> touching(ix.service_count());
  for (std::size_t c = 0; c < chains.size(); ++c) {
    std::set<int> services;
    for (int fn : chains[c].hops) services.insert(ix.service_of(fn));
    for (int svc : services) touching[svc].push_back(static_cast<int>(c));
  }

  std::vector<double> chain_t(chains.size());
  for (std::size_t c = 0; c < chains.size(); ++c)
    chain_t[c] = chain_average_time_qsrfp(chains[c], x, ix);
  // Must fold exactly like system_average_time so the accepted decreases
  // survive a fresh evaluation bit for bit.
  auto fold = [&](const std::vector<double>& ct) {
    double t = 0.0;
    for (std::size_t c = 0; c < chains.size(); ++c)
      t += ix.demand_total(chains[c].entry) / grand * ct[c];
    return t;
  };
  double t_cur = fold(chain_t);

  std::vector<double> scratch;
  while (true) {
    double best_t = t_cur;
    int best_service = -1;
    int best_server_idx = -1;
    for (int svc : ix.services_by_id()) {
      if (touching[svc].empty()) continue;
      for (int n : ix.servers_by_id()) {
        if (server_load(x, ix, n, svc, 1) > ix.server_resource(n)) continue;
        if (deployment_cost(x, ix, n, svc, 1) > ix.max_cost()) continue;
        x.x[n][svc] += 1;
        scratch = chain_t;
        for (int c : touching[svc])
          scratch[c] = chain_average_time_qsrfp(chains[c], x, ix);
        const double t_new = fold(scratch);
        x.x[n][svc] -= 1;
        if (t_new < best_t) {
          best_t = t_new;
          best_service = svc;
          best_server_idx = n;
        }
      }
    }
    if (best_service < 0) break;
    x.x[best_server_idx][best_service] += 1;
    for (int c : touching[best_service])
      chain_t[c] = chain_average_time_qsrfp(chains[c], x, ix);
    t_cur = fold(chain_t);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Greedy placement, breadth-first over the service dependency graph
// ---------------------------------------------------------------------------

/// Repeatedly picks a predecessor-free service from a shrinking copy of the
/// service dependency graph, ordered by mu/resource (pseudocode order:
/// smallest first; prose order: largest first), and deploys its minimum
/// instance count via deploy_spread. Placement always sees the full graph;
/// only selection shrinks.
inline SolverResult solve_b_qsrfp(const ScenarioIndex& ix,
                                  const std::vector<FunctionChain>& chains,
                                  const DemandSummary& demand,
                                  const SolveOptions& opt = {}) {
  SolverResult r;
  r.algorithm = "b-qsrfp";
  r.service_order = detail::to_string(opt.service_order);
  r.scheme = make_zero_scheme(ix.server_count(), ix.service_count());

  Stopwatch sw;
  std::set<int> remaining;  // service ranks
  for (int i = 0; i < ix.service_count(); ++i)
    remaining.insert(ix.service_rank(i));
  try {
    while (!remaining.empty()) {
      // Predecessor-free services first. A service-level cycle (functions
      // acyclic, services not) can leave none; fall back to all remaining.
      std::vector<int> candidates;
      for (int rank : remaining) {
        const int svc = ix.services_by_id()[rank];
        bool root = true;
        for (int p : ix.service_preds(svc))
          if (remaining.count(ix.service_rank(p))) {
            root = false;
            break;
          }
        if (root) candidates.push_back(svc);
      }
      if (candidates.empty())
        for (int rank : remaining)
          candidates.push_back(ix.services_by_id()[rank]);

      int chosen = -1;
      double chosen_score = 0.0;
      for (int svc : candidates) {
        const double score = ix.mu(svc) / ix.service_resource(svc);
        const bool better = opt.service_order == ServiceOrder::kPseudocode
                                ? score < chosen_score
                                : score > chosen_score;
        if (chosen < 0 || better) {
          chosen = svc;
          chosen_score = score;
        }
      }

      const long long count = min_instances(demand.total(chosen), ix.mu(chosen));
      if (count > 0) deploy_spread(chosen, count, r.scheme, ix);
      remaining.erase(ix.service_rank(chosen));
    }
    if (opt.improve && check_constraints(r.scheme, ix, demand).empty())
      r.scheme = improvement_pass(r.scheme, ix, chains);
  } catch (const InsufficientCapacityError& e) {
    r.error = e.what();
  }
  r.wall_ms = sw.elapsed_ms();
  detail::finalize_result(r, ix, chains, demand);
  return r;
}

// ---------------------------------------------------------------------------
// Greedy placement, depth-first along demanded chains
// ---------------------------------------------------------------------------

/// Heuristic weight for chain ordering: bytes moved per unit time, i.e. the
/// entry rate times the call-multiplicity-weighted payload of every position
/// (the entry's own payload counts once for the user hop).
inline double chain_transmission_score(const FunctionChain& chain,
                                       const ScenarioIndex& ix) {
  double bytes = ix.data_kb(chain.entry);
  for (std::size_t m = 1; m < chain.hops.size(); ++m)
    bytes += chain.demand_coe[m] * ix.data_kb(chain.hops[m]);
  return ix.demand_total(chain.entry) * bytes;
}

/// Walks demanded chains in descending transmission-score order. At each
/// position the uncovered demand (position rate minus spare deployed
/// capacity) is topped up with the minimum instance count via deploy_spread.
inline SolverResult solve_d_qsrfp(const ScenarioIndex& ix,
                                  const std::vector<FunctionChain>& chains,
                                  const DemandSummary& demand,
                                  const SolveOptions& opt = {}) {
  SolverResult r;
  r.algorithm = "d-qsrfp";
  r.scheme = make_zero_scheme(ix.server_count(), ix.service_count());

  Stopwatch sw;
  std::vector<int> order(chains.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> score(chains.size());
  for (std::size_t c = 0; c < chains.size(); ++c)
    score[c] = chain_transmission_score(chains[c], ix);
  // chains are sorted by entry id, so stable sort keeps id order on ties
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return score[a] > score[b]; });

  std::vector<double> lambda_solved(ix.service_count(), 0.0);
  try {
    for (int c : order) {
      const FunctionChain& chain = chains[c];
      const double entry_rate = ix.demand_total(chain.entry);
      for (std::size_t m = 0; m < chain.hops.size(); ++m) {
        const int svc = ix.service_of(chain.hops[m]);
        const double lambda_c = chain.demand_coe[m] * entry_rate;
        const double deficit =
            lambda_solved[svc] + lambda_c -
            static_cast<double>(instance_total(r.scheme, svc)) * ix.mu(svc);
        if (deficit > 0)
          deploy_spread(svc, min_instances(deficit, ix.mu(svc)), r.scheme, ix);
        // Accumulated unconditionally: slack capacity from rounding up must
        // not hide later demand, or the capability constraint breaks.
        lambda_solved[svc] += lambda_c;
      }
    }
    if (opt.improve && check_constraints(r.scheme, ix, demand).empty())
      r.scheme = improvement_pass(r.scheme, ix, chains);
  } catch (const InsufficientCapacityError& e) {
    r.error = e.what();
  }
  r.wall_ms = sw.elapsed_ms();
  detail::finalize_result(r, ix, chains, demand);
  return r;
}

/// Runs both greedy placements and returns the feasible one with the
/// smaller T(X).
inline SolverResult solve_bd_qsrfp(const ScenarioIndex& ix,
                                   const std::vector<FunctionChain>& chains,
                                   const DemandSummary& demand,
                                   const SolveOptions& opt = {}) {
  SolverResult b = solve_b_qsrfp(ix, chains, demand, opt);
  SolverResult d = solve_d_qsrfp(ix, chains, demand, opt);
  SolverResult r;
  if (b.feasible && d.feasible)
    r = b.t_system_ms <= d.t_system_ms ? b : d;
  else if (b.feasible)
    r = b;
  else if (d.feasible)
    r = d;
  else {
    r = b;
    if (r.error.empty())
      r.error = "infeasible-scenario: neither placement is feasible";
  }
  r.algorithm = "bd-qsrfp";
  r.service_order = detail::to_string(opt.service_order);
  r.wall_ms = b.wall_ms + d.wall_ms;
  return r;
}

// ---------------------------------------------------------------------------
// Random baseline
// ---------------------------------------------------------------------------

/// Places each service's minimum instance count on uniformly random servers
/// with room, `trials` times. Reports the mean T(X) over feasible trials and
/// returns the best scheme found.
inline SolverResult solve_random(const ScenarioIndex& ix,
                                 const std::vector<FunctionChain>& chains,
                                 const DemandSummary& demand,
                                 const SolveOptions& opt = {}) {
  SolverResult r;
  r.algorithm = "random";
  if (opt.trials < 1) throw std::invalid_argument("trials must be >= 1");

  std::vector<long long> counts(ix.service_count());
  for (int i = 0; i < ix.service_count(); ++i)
    counts[i] = min_instances(demand.total(i), ix.mu(i));

  std::mt19937_64 rng(opt.seed);
  std::vector<double> times;
  DeploymentScheme best;
  double best_t = std::numeric_limits<double>::infinity();

  Stopwatch sw;
  for (int trial = 0; trial < opt.trials; ++trial) {
    DeploymentScheme x = make_zero_scheme(ix.server_count(), ix.service_count());
    bool placed_all = true;
    std::vector<int> room;
    for (int svc : ix.services_by_id()) {
      for (long long inst = 0; inst < counts[svc] && placed_all; ++inst) {
        room.clear();
        for (int n : ix.servers_by_id())
          if (server_load(x, ix, n, svc, 1) <= ix.server_resource(n))
            room.push_back(n);
        if (room.empty()) {
          placed_all = false;
          break;
        }
        std::uniform_int_distribution<std::size_t> pick(0, room.size() - 1);
        x.x[room[pick(rng)]][svc] += 1;
      }
      if (!placed_all) break;
    }
    if (!placed_all || !check_constraints(x, ix, demand).empty()) continue;
    double t;
    try {
      t = system_average_time(x, ix, chains, EvalMode::kQsrfp).t_system_ms;
    } catch (const UndefinedRoutingError&) {
      continue;
    }
    times.push_back(t);
    if (t < best_t) {
      best_t = t;
      best = x;
    }
  }
  r.wall_ms = sw.elapsed_ms();

  if (times.empty()) {
    r.error = "infeasible-scenario: no random trial was feasible";
    r.scheme = make_zero_scheme(ix.server_count(), ix.service_count());
    return r;
  }
  double mean = 0.0;
  for (double t : times) mean += t;
  mean /= static_cast<double>(times.size());
  double var = 0.0;
  for (double t : times) var += (t - mean) * (t - mean);
  var /= static_cast<double>(times.size());

  r.scheme = std::move(best);
  r.t_system_ms = mean;
  r.t_best_ms = best_t;
  r.t_variance = var;
  r.feasible_trials = static_cast<int>(times.size());
  r.feasible = true;
  return r;
}

// ---------------------------------------------------------------------------
// Exhaustive exact oracle
// ---------------------------------------------------------------------------

/// Enumerates every feasible scheme between the per-service minimum counts
/// and the cost/resource ceilings and returns the global T(X) minimizer.
/// Throws EnumerationGuardError when the a-priori state estimate exceeds
/// `guard`. Deterministic: ties keep the lexicographically first scheme.
inline SolverResult exhaustive_optimal(const ScenarioIndex& ix,
                                       const std::vector<FunctionChain>& chains,
                                       const DemandSummary& demand,
                                       long long guard = kDefaultPathGuard) {
  SolverResult r;
  r.algorithm = "optimal";
  const int n_servers = ix.server_count();
  const int n_services = ix.service_count();

  std::vector<bool> on_chain(n_services, false);
  for (const auto& chain : chains)
    for (int fn : chain.hops) on_chain[ix.service_of(fn)] = true;

  std::vector<long long> lo(n_services), hi(n_services);
  double min_resource_units = 0.0;
  for (int i = 0; i < n_services; ++i) {
    lo[i] = min_instances(demand.total(i), ix.mu(i));
    if (on_chain[i] && lo[i] == 0) lo[i] = 1;  // routing needs an instance
    min_resource_units += static_cast<double>(lo[i]) * ix.service_resource(i);
  }
  double total_server_resource = 0.0;
  for (int j = 0; j < n_servers; ++j)
    total_server_resource += ix.server_resource(j);
  const double budget_units = ix.max_cost() / ix.unit_cost();
  for (int i = 0; i < n_services; ++i) {
    const double others =
        min_resource_units - static_cast<double>(lo[i]) * ix.service_resource(i);
    const double room = std::min(budget_units, total_server_resource) - others;
    // +1 absorbs rounding at the boundary; the leaf check is authoritative.
    const long long cap =
        static_cast<long long>(std::floor(room / ix.service_resource(i))) + 1;
    hi[i] = std::max(lo[i], cap);
    if (room < 0 || cap < lo[i]) {
      r.error = "infeasible-scenario: minimum deployment exceeds budget";
      r.scheme = make_zero_scheme(n_servers, n_services);
      return r;
    }
  }

  // A-priori state estimate: distributions of t instances over |N| servers,
  // summed over each service's count range, multiplied across services.
  long double estimate = 1.0L;
  for (int i = 0; i < n_services && estimate <= guard; ++i) {
    long double per_service = 0.0L;
    for (long long t = lo[i]; t <= hi[i] && per_service <= guard; ++t) {
      long double comps = 1.0L;  // C(t + N - 1, N - 1)
      for (int k = 1; k < n_servers; ++k)
        comps = comps * static_cast<long double>(t + k) / k;
      per_service += comps;
    }
    estimate *= per_service;
  }
  if (estimate > static_cast<long double>(guard))
    throw EnumerationGuardError(
        "state-space-too-large: exhaustive search exceeds guard");

  DeploymentScheme x = make_zero_scheme(n_servers, n_services);
  DeploymentScheme best;
  double best_t = std::numeric_limits<double>::infinity();
  bool found = false;

  Stopwatch sw;
  auto leaf = [&]() {
    if (!check_constraints(x, ix, demand).empty()) return;
    double t;
    try {
      t = system_average_time(x, ix, chains, EvalMode::kQsrfp).t_system_ms;
    } catch (const UndefinedRoutingError&) {
      return;
    }
    if (t < best_t) {
      best_t = t;
      best = x;
      found = true;
    }
  };
  auto place = [&](auto&& self, int svc, int server, long long placed) -> void {
    if (svc == n_services) {
      leaf();
      return;
    }
    if (server == n_servers - 1) {
      const long long need_lo = std::max<long long>(0, lo[svc] - placed);
      for (long long q = need_lo; placed + q <= hi[svc]; ++q) {
        x.x[server][svc] = q;
        if (server_load(x, ix, server) <= ix.server_resource(server) &&
            deployment_cost(x, ix) <= ix.max_cost())
          self(self, svc + 1, 0, 0);
      }
      x.x[server][svc] = 0;
      return;
    }
    for (long long q = 0; placed + q <= hi[svc]; ++q) {
      x.x[server][svc] = q;
      if (server_load(x, ix, server) > ix.server_resource(server)) break;
      if (deployment_cost(x, ix) > ix.max_cost()) break;
      self(self, svc, server + 1, placed + q);
    }
    x.x[server][svc] = 0;
  };
  place(place, 0, 0, 0);
  r.wall_ms = sw.elapsed_ms();

  if (!found) {
    r.error = "infeasible-scenario: no feasible scheme in the search space";
    r.scheme = make_zero_scheme(n_servers, n_services);
    return r;
  }
  r.scheme = std::move(best);
  r.t_system_ms = best_t;
  r.feasible = true;
  return r;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

inline SolverResult solve(const PreparedScenario& p,
                          const std::string& algorithm,
                          const SolveOptions& opt = {}) {
  if (algorithm == "b-qsrfp")
    return solve_b_qsrfp(p.index, p.chains, p.demand, opt);
  if (algorithm == "d-qsrfp")
    return solve_d_qsrfp(p.index, p.chains, p.demand, opt);
  if (algorithm == "bd-qsrfp")
    return solve_bd_qsrfp(p.index, p.chains, p.demand, opt);
  if (algorithm == "random")
    return solve_random(p.index, p.chains, p.demand, opt);
  if (algorithm == "optimal")
    return exhaustive_optimal(p.index, p.chains, p.demand, opt.guard);
  throw std::invalid_argument("unknown algorithm: " + algorithm);
}

}  // namespace msplace
