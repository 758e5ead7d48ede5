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
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "msplace/common.hpp"

namespace msplace {

/// One API exposed by a service. Data sizes are in KB.
struct FunctionSpec {
  std::string id;
  double d_in_kb = 0.0;
  double d_out_kb = 0.0;

  bool operator==(const FunctionSpec&) const = default;
};

/// A service: its functions, per-instance processing capacity (requests per
/// unit time) and per-instance resource demand (resource units).
struct ServiceSpec {
  std::string id;
  std::vector<FunctionSpec> functions;
  double mu = 0.0;
  double resource = 0.0;

  bool operator==(const ServiceSpec&) const = default;
};

/// Call edge between two functions (or from the USER node), weighted by the
/// average call frequency coefficient: how often `to` runs per call of
/// `from`. Zero marks a virtual call.
struct DependencyEdge {
  std::string from;
  std::string to;
  double acfc = 0.0;

  bool operator==(const DependencyEdge&) const = default;
};

struct DependencyGraph {
  std::vector<DependencyEdge> edges;

  bool operator==(const DependencyGraph&) const = default;
};

struct ServerSpec {
  std::string id;
  double resource = 0.0;

  bool operator==(const ServerSpec&) const = default;
};

/// Pairwise effective one-way delay (ms) and bandwidth (MB/s) between
/// servers. Matrices are dense, row-major, and may be asymmetric. The
/// diagonal is fixed: delay 0 and bandwidth kIntraBandwidth.
struct NetworkModel {
  std::vector<std::vector<double>> delay_ms;
  std::vector<std::vector<double>> bandwidth_mbps;

  bool operator==(const NetworkModel&) const = default;
};

struct DemandEntry {
  std::string function;
  std::string server;
  double rate = 0.0;

  bool operator==(const DemandEntry&) const = default;
};

/// Request rate per (function, server) pair, requests per unit time.
struct DemandProfile {
  std::vector<DemandEntry> entries;

  bool operator==(const DemandProfile&) const = default;
};

struct CostModel {
  double unit_cost = 1.0;
  double max_cost = 0.0;

  bool operator==(const CostModel&) const = default;
};

/// A complete problem instance.
struct Scenario {
  std::vector<ServiceSpec> services;
  DependencyGraph dependencies;
  std::vector<ServerSpec> servers;
  NetworkModel network;
  DemandProfile demand;
  CostModel cost;

  bool operator==(const Scenario&) const = default;
};

/// Instance-count matrix indexed [server][service].
struct DeploymentScheme {
  std::vector<std::vector<long long>> x;

  bool operator==(const DeploymentScheme&) const = default;
};

inline DeploymentScheme make_zero_scheme(std::size_t n_servers,
                                         std::size_t n_services) {
  DeploymentScheme s;
  s.x.assign(n_servers, std::vector<long long>(n_services, 0));
  return s;
}

struct Violation {
  std::string constraint;  // "server-resource" | "cost" | "capability"
  std::string entity;      // offending server/service id; empty for cost
  double margin = 0.0;     // amount by which the constraint is exceeded
};

struct EvaluationReport {
  double t_system_ms = 0.0;
  std::vector<std::pair<std::string, double>> per_function;
  bool constraints_ok = false;
  std::vector<Violation> violations;
  std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace detail {

inline bool finite(double v) { return std::isfinite(v); }

// Kahn topological check over function-level edges (USER excluded).
inline bool graph_acyclic(
    const std::vector<std::vector<int>>& out_edges) {
  const int n = static_cast<int>(out_edges.size());
  std::vector<int> indeg(n, 0);
  for (const auto& outs : out_edges)
    for (int v : outs) ++indeg[v];
  std::vector<int> queue;
  for (int v = 0; v < n; ++v)
    if (indeg[v] == 0) queue.push_back(v);
  int seen = 0;
  while (!queue.empty()) {
    int u = queue.back();
    queue.pop_back();
    ++seen;
    for (int v : out_edges[u])
      if (--indeg[v] == 0) queue.push_back(v);
  }
  return seen == n;
}

}  // namespace detail

/// Checks every model invariant; returns one message per violation (empty
/// means the scenario is well formed). Pure; never throws.
inline std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> errors;
  auto err = [&errors](const std::string& m) { errors.push_back(m); };

  std::unordered_map<std::string, int> fn_index;
  std::set<std::string> service_ids;
  for (const auto& svc : s.services) {
    if (!service_ids.insert(svc.id).second)
      err("service '" + svc.id + "': duplicate id");
    if (!(svc.mu > 0) || !detail::finite(svc.mu))
      err("service '" + svc.id + "': mu must be positive");
    if (!(svc.resource > 0) || !detail::finite(svc.resource))
      err("service '" + svc.id + "': resource demand must be positive");
    if (svc.functions.empty())
      err("service '" + svc.id + "': functions must be non-empty");
    for (const auto& fn : svc.functions) {
      if (fn.id == kUserNode) err("function id '" + fn.id + "' is reserved");
      auto [it, inserted] =
          fn_index.emplace(fn.id, static_cast<int>(fn_index.size()));
      if (!inserted) err("function '" + fn.id + "': duplicate id");
      if (fn.d_in_kb < 0 || !detail::finite(fn.d_in_kb))
        err("function '" + fn.id + "': d_in must be non-negative");
      if (fn.d_out_kb < 0 || !detail::finite(fn.d_out_kb))
        err("function '" + fn.id + "': d_out must be non-negative");
    }
  }

  std::set<std::string> server_ids;
  for (const auto& srv : s.servers) {
    if (!server_ids.insert(srv.id).second)
      err("server '" + srv.id + "': duplicate id");
    if (!(srv.resource > 0) || !detail::finite(srv.resource))
      err("server '" + srv.id + "': resource capacity must be positive");
  }

  // Dependency edges: resolvable endpoints, USER never a callee, unique
  // (from, to) pairs, non-negative weights, acyclic.
  std::vector<std::vector<int>> out_edges(fn_index.size());
  std::set<std::pair<std::string, std::string>> edge_keys;
  for (const auto& e : s.dependencies.edges) {
    if (!edge_keys.insert({e.from, e.to}).second)
      err("edge " + e.from + "->" + e.to + ": duplicate edge");
    if (e.to == kUserNode)
      err("edge " + e.from + "->" + e.to + ": USER cannot receive calls");
    if (e.from != kUserNode && !fn_index.count(e.from))
      err("edge " + e.from + "->" + e.to + ": unknown caller function");
    if (!fn_index.count(e.to) && e.to != kUserNode)
      err("edge " + e.from + "->" + e.to + ": unknown callee function");
    if (e.acfc < 0 || !detail::finite(e.acfc))
      err("edge " + e.from + "->" + e.to + ": acfc must be non-negative");
    if (e.from != kUserNode && fn_index.count(e.from) && fn_index.count(e.to))
      out_edges[fn_index[e.from]].push_back(fn_index[e.to]);
  }
  if (!detail::graph_acyclic(out_edges)) err("dependency graph cyclic");

  const std::size_t n = s.servers.size();
  auto check_matrix = [&](const std::vector<std::vector<double>>& m,
                          const char* name) {
    if (m.size() != n) {
      err(std::string(name) + ": row count must equal server count");
      return false;
    }
    for (const auto& row : m)
      if (row.size() != n) {
        err(std::string(name) + ": column count must equal server count");
        return false;
      }
    return true;
  };
  if (check_matrix(s.network.delay_ms, "network.delay_ms")) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double d = s.network.delay_ms[i][j];
        if (i == j && d != 0.0)
          err("network.delay_ms[" + std::to_string(i) + "][" +
              std::to_string(i) + "]: self-delay must be zero");
        if (i != j && (d < 0 || !detail::finite(d)))
          err("network.delay_ms[" + std::to_string(i) + "][" +
              std::to_string(j) + "]: delay must be non-negative");
      }
  }
  if (check_matrix(s.network.bandwidth_mbps, "network.bandwidth_mbps")) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double b = s.network.bandwidth_mbps[i][j];
        if (i == j && b != kIntraBandwidth)
          err("network.bandwidth_mbps[" + std::to_string(i) + "][" +
              std::to_string(i) + "]: diagonal must be the INTRA sentinel");
        if (i != j && (!(b > 0) || !detail::finite(b)))
          err("network.bandwidth_mbps[" + std::to_string(i) + "][" +
              std::to_string(j) + "]: bandwidth must be positive");
      }
  }

  std::set<std::pair<std::string, std::string>> demand_keys;
  for (const auto& d : s.demand.entries) {
    if (!fn_index.count(d.function))
      err("demand for '" + d.function + "': unknown function");
    if (!server_ids.count(d.server))
      err("demand on '" + d.server + "': unknown server");
    if (d.rate < 0 || !detail::finite(d.rate))
      err("demand for '" + d.function + "' on '" + d.server +
          "': rate must be non-negative");
    if (!demand_keys.insert({d.function, d.server}).second)
      err("demand for '" + d.function + "' on '" + d.server +
          "': duplicate entry");
  }

  if (!(s.cost.unit_cost > 0) || !detail::finite(s.cost.unit_cost))
    err("cost.unit_cost must be positive");
  if (!(s.cost.max_cost > 0) || !detail::finite(s.cost.max_cost))
    err("cost.max_cost must be positive");

  return errors;
}

// ---------------------------------------------------------------------------
// ScenarioIndex: the compiled, index-based view the algorithms work on.
// ---------------------------------------------------------------------------

/// Caller->callee function edge attached to a service, used when scoring
/// candidate servers. `callee_fn` owns the data that moves on the call.
struct ServiceLink {
  int neighbor = -1;      // the other service
  int callee_fn = -1;     // global function index of the callee
  bool incoming = false;  // true: neighbor calls this service
};

/// Immutable flattened view of a Scenario: ids resolved to dense indices,
/// demand as a matrix, function- and service-level adjacency precomputed.
/// Construction throws std::invalid_argument on dangling references; run
/// validate_scenario first for full diagnostics.
class ScenarioIndex {
 public:
  explicit ScenarioIndex(const Scenario& s) {
    for (int i = 0; i < static_cast<int>(s.services.size()); ++i) {
      const auto& svc = s.services[i];
      service_ids_.push_back(svc.id);
      mu_.push_back(svc.mu);
      service_resource_.push_back(svc.resource);
      if (!service_index_.emplace(svc.id, i).second)
        throw std::invalid_argument("duplicate service id: " + svc.id);
      std::vector<int> fns;
      for (const auto& fn : svc.functions) {
        const int f = static_cast<int>(functions_.size());
        functions_.push_back(fn);
        service_of_.push_back(i);
        if (!function_index_.emplace(fn.id, f).second)
          throw std::invalid_argument("duplicate function id: " + fn.id);
        fns.push_back(f);
      }
      service_functions_.push_back(std::move(fns));
    }
    for (int j = 0; j < static_cast<int>(s.servers.size()); ++j) {
      server_ids_.push_back(s.servers[j].id);
      server_resource_.push_back(s.servers[j].resource);
      if (!server_index_.emplace(s.servers[j].id, j).second)
        throw std::invalid_argument("duplicate server id: " + s.servers[j].id);
    }
    servers_by_id_.resize(server_ids_.size());
    for (int j = 0; j < server_count(); ++j) servers_by_id_[j] = j;
    std::sort(servers_by_id_.begin(), servers_by_id_.end(),
              [&](int a, int b) { return server_ids_[a] < server_ids_[b]; });
    services_by_id_.resize(service_ids_.size());
    for (int i = 0; i < service_count(); ++i) services_by_id_[i] = i;
    std::sort(services_by_id_.begin(), services_by_id_.end(),
              [&](int a, int b) { return service_ids_[a] < service_ids_[b]; });
    service_rank_.resize(service_ids_.size());
    for (int r = 0; r < service_count(); ++r)
      service_rank_[services_by_id_[r]] = r;

    network_ = s.network;
    unit_cost_ = s.cost.unit_cost;
    max_cost_ = s.cost.max_cost;

    lambda_.assign(function_count(),
                   std::vector<double>(server_count(), 0.0));
    lambda_total_.assign(function_count(), 0.0);
    for (const auto& d : s.demand.entries) {
      const int f = function_index(d.function);
      const int k = server_index(d.server);
      lambda_[f][k] += d.rate;
      lambda_total_[f] += d.rate;
    }
    for (int f = 0; f < function_count(); ++f) {
      grand_total_ += lambda_total_[f];
      if (lambda_total_[f] > 0) demanded_.push_back(f);
    }
    std::sort(demanded_.begin(), demanded_.end(), [&](int a, int b) {
      return functions_[a].id < functions_[b].id;
    });

    callees_.assign(function_count(), {});
    std::vector<std::set<int>> preds(service_count());
    std::vector<std::set<int>> succs(service_count());
    service_links_.assign(service_count(), {});
    for (const auto& e : s.dependencies.edges) {
      if (e.from == kUserNode) continue;  // origin marker, not a call
      const int from = function_index(e.from);
      const int to = function_index(e.to);
      callees_[from].push_back({to, e.acfc});
      const int sa = service_of_[from];
      const int sb = service_of_[to];
      if (sa == sb) continue;  // placement ignores intra-service calls
      preds[sb].insert(sa);
      succs[sa].insert(sb);
      service_links_[sb].push_back({sa, to, true});
      service_links_[sa].push_back({sb, to, false});
    }
    for (auto& outs : callees_)
      std::sort(outs.begin(), outs.end(),
                [&](const auto& a, const auto& b) {
                  return functions_[a.first].id < functions_[b.first].id;
                });
    for (int i = 0; i < service_count(); ++i) {
      service_preds_.emplace_back(preds[i].begin(), preds[i].end());
      service_succs_.emplace_back(succs[i].begin(), succs[i].end());
    }
  }

  int service_count() const { return static_cast<int>(service_ids_.size()); }
  int server_count() const { return static_cast<int>(server_ids_.size()); }
  int function_count() const { return static_cast<int>(functions_.size()); }

  const std::string& service_id(int i) const { return service_ids_[i]; }
  const std::string& server_id(int j) const { return server_ids_[j]; }
  const FunctionSpec& function(int f) const { return functions_[f]; }
  const std::string& function_id(int f) const { return functions_[f].id; }
  int service_of(int f) const { return service_of_[f]; }
  double mu(int i) const { return mu_[i]; }
  double service_resource(int i) const { return service_resource_[i]; }
  double server_resource(int j) const { return server_resource_[j]; }
  const std::vector<int>& functions_of(int i) const {
    return service_functions_[i];
  }

  int service_index(const std::string& id) const {
    auto it = service_index_.find(id);
    if (it == service_index_.end())
      throw std::invalid_argument("unknown service id: " + id);
    return it->second;
  }
  int server_index(const std::string& id) const {
    auto it = server_index_.find(id);
    if (it == server_index_.end())
      throw std::invalid_argument("unknown server id: " + id);
    return it->second;
  }
  int function_index(const std::string& id) const {
    auto it = function_index_.find(id);
    if (it == function_index_.end())
      throw std::invalid_argument("unknown function id: " + id);
    return it->second;
  }

  const NetworkModel& network() const { return network_; }
  double delay(int from, int to) const { return network_.delay_ms[from][to]; }
  double bandwidth(int from, int to) const {
    return network_.bandwidth_mbps[from][to];
  }
  double unit_cost() const { return unit_cost_; }
  double max_cost() const { return max_cost_; }

  double demand(int f, int server) const { return lambda_[f][server]; }
  double demand_total(int f) const { return lambda_total_[f]; }
  double demand_grand_total() const { return grand_total_; }
  /// Functions with positive total demand, sorted by id.
  const std::vector<int>& demanded_functions() const { return demanded_; }

  /// Out-edges of a function, (callee, acfc), sorted by callee id.
  const std::vector<std::pair<int, double>>& callees(int f) const {
    return callees_[f];
  }
  const std::vector<int>& service_preds(int i) const {
    return service_preds_[i];
  }
  const std::vector<int>& service_succs(int i) const {
    return service_succs_[i];
  }
  const std::vector<ServiceLink>& service_links(int i) const {
    return service_links_[i];
  }
  /// Server indices ordered by server id (deterministic tie-breaking).
  const std::vector<int>& servers_by_id() const { return servers_by_id_; }
  const std::vector<int>& services_by_id() const { return services_by_id_; }
  /// Position of a service in id order.
  int service_rank(int i) const { return service_rank_[i]; }

  double data_kb(int f) const {
    return functions_[f].d_in_kb + functions_[f].d_out_kb;
  }

 private:
  std::vector<std::string> service_ids_;
  std::vector<double> mu_;
  std::vector<double> service_resource_;
  std::vector<std::vector<int>> service_functions_;
  std::vector<FunctionSpec> functions_;
  std::vector<int> service_of_;
  std::vector<std::string> server_ids_;
  std::vector<double> server_resource_;
  std::vector<int> servers_by_id_;
  std::vector<int> services_by_id_;
  std::vector<int> service_rank_;
  std::unordered_map<std::string, int> service_index_;
  std::unordered_map<std::string, int> server_index_;
  std::unordered_map<std::string, int> function_index_;
  NetworkModel network_;
  double unit_cost_ = 1.0;
  double max_cost_ = 0.0;
  std::vector<std::vector<double>> lambda_;
  std::vector<double> lambda_total_;
  double grand_total_ = 0.0;
  std::vector<int> demanded_;
  std::vector<std::vector<std::pair<int, double>>> callees_;
  std::vector<std::vector<int>> service_preds_;
  std::vector<std::vector<int>> service_succs_;
  std::vector<std::vector<ServiceLink>> service_links_;
};

/// Total instances of a service across all servers.
inline long long instance_total(const DeploymentScheme& x, int service) {
  long long t = 0;
  for (const auto& row : x.x) t += row[service];
  return t;
}

/// Total instances in the whole scheme.
inline long long total_instances(const DeploymentScheme& x) {
  long long t = 0;
  for (const auto& row : x.x)
    for (long long v : row) t += v;
  return t;
}

// Resource and cost folds. Solvers must size placements through these same
// folds so that a scheme they emit is feasible under check_constraints with
// the identical floating-point arithmetic, not merely up to rounding.

/// Resources used on `server`, with `extra` hypothetical instances of
/// `extra_service` included (pass extra = 0 for the plain load).
inline double server_load(const DeploymentScheme& x, const ScenarioIndex& ix,
                          int server, int extra_service = -1,
                          long long extra = 0) {
  double used = 0.0;
  for (int i = 0; i < ix.service_count(); ++i) {
    long long count = x.x[server][i] + (i == extra_service ? extra : 0);
    used += static_cast<double>(count) * ix.service_resource(i);
  }
  return used;
}

/// Monetary cost of the scheme, with optional hypothetical instances.
inline double deployment_cost(const DeploymentScheme& x,
                              const ScenarioIndex& ix, int extra_server = -1,
                              int extra_service = -1, long long extra = 0) {
  double units = 0.0;
  for (int j = 0; j < ix.server_count(); ++j)
    for (int i = 0; i < ix.service_count(); ++i) {
      long long count = x.x[j][i];
      if (j == extra_server && i == extra_service) count += extra;
      units += ix.service_resource(i) * static_cast<double>(count);
    }
  return ix.unit_cost() * units;
}

/// Largest additional instance count of `service` that still fits on
/// `server`, judged by the exact server_load fold.
inline long long max_additional_fit(const DeploymentScheme& x,
                                    const ScenarioIndex& ix, int server,
                                    int service) {
  const double cap = ix.server_resource(server);
  const double free_est = cap - server_load(x, ix, server);
  long long c = static_cast<long long>(
      std::floor(free_est / ix.service_resource(service)));
  if (c < 0) c = 0;
  while (c > 0 && server_load(x, ix, server, service, c) > cap) --c;
  while (server_load(x, ix, server, service, c + 1) <= cap) ++c;
  return c;
}

}  // namespace msplace
