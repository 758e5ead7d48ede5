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
#include <string>
#include <unordered_map>
#include <vector>

#include "msplace/model.hpp"

namespace msplace {

/// Linearization of the calling subgraph reachable from one user-requested
/// entry function. Positions are functions; consecutive positions are joined
/// either by a real call edge or by a virtual link inserted where the
/// original path branched or rejoined. Virtual links transfer no data and
/// carry ACFC 0.
///
/// `demand_coe[m]` is how many times hops[m] runs per single request to the
/// entry, accumulated along real call edges of the graph (a virtual link
/// does not interrupt demand propagation).
struct FunctionChain {
  int entry = -1;
  std::vector<int> hops;
  std::vector<double> hop_acfc;     // size hops.size() - 1
  std::vector<bool> virtual_link;   // size hops.size() - 1
  std::vector<double> demand_coe;   // size hops.size()
};

/// Plain per-position products of the chain's own hop ACFCs:
/// coefficient[0] = 1, coefficient[m] = prod of hop_acfc[0..m-1].
inline std::vector<double> chain_coefficients(const FunctionChain& chain) {
  std::vector<double> coe(chain.hops.size(), 1.0);
  for (std::size_t m = 1; m < chain.hops.size(); ++m)
    coe[m] = coe[m - 1] * chain.hop_acfc[m - 1];
  return coe;
}

/// Converts the calling subgraph rooted at `entry` into a chain. Traversal
/// is depth-first with callees visited in lexicographic function-id order;
/// every reachable function appears exactly once. Throws on an unknown entry
/// and (defensively) on a cycle.
inline FunctionChain calling_subgraph_to_chain(const ScenarioIndex& ix,
                                               int entry) {
  if (entry < 0 || entry >= ix.function_count())
    throw std::invalid_argument("calling_subgraph_to_chain: unknown entry");

  FunctionChain chain;
  chain.entry = entry;

  enum class Mark { kUnseen, kActive, kDone };
  std::vector<Mark> mark(ix.function_count(), Mark::kUnseen);
  int last_emitted = -1;

  // Iterative DFS; (node, next-callee cursor). Callees are pre-sorted by id.
  std::vector<std::pair<int, std::size_t>> stack;
  auto emit = [&](int fn, int parent) {
    if (last_emitted >= 0) {
      const bool direct = (parent == last_emitted);
      double acfc = 0.0;
      if (direct) {
        for (const auto& [to, w] : ix.callees(parent))
          if (to == fn) {
            acfc = w;
            break;
          }
      }
      chain.hop_acfc.push_back(direct ? acfc : 0.0);
      chain.virtual_link.push_back(!direct);
    }
    chain.hops.push_back(fn);
    last_emitted = fn;
  };

  emit(entry, -1);
  mark[entry] = Mark::kActive;
  stack.push_back({entry, 0});
  while (!stack.empty()) {
    auto& [node, cursor] = stack.back();
    const auto& outs = ix.callees(node);
    if (cursor == outs.size()) {
      mark[node] = Mark::kDone;
      stack.pop_back();
      continue;
    }
    const int next = outs[cursor++].first;
    if (mark[next] == Mark::kActive)
      throw Error("cycle detected in calling subgraph of '" +
                  ix.function_id(entry) + "'");
    if (mark[next] == Mark::kDone) continue;  // rejoin; already linearized
    emit(next, node);
    mark[next] = Mark::kActive;
    stack.push_back({next, 0});
  }

  // Demand coefficients: propagate call multiplicities along real edges of
  // the subgraph. DFS preorder of a DAG is not a topological order once
  // paths rejoin, so relax in chain order until stable (path lengths are
  // tiny; this settles in at most |hops| passes).
  const std::size_t n = chain.hops.size();
  std::unordered_map<int, std::size_t> pos;
  for (std::size_t m = 0; m < n; ++m) pos.emplace(chain.hops[m], m);
  chain.demand_coe.assign(n, 0.0);
  chain.demand_coe[0] = 1.0;
  for (std::size_t pass = 0; pass + 1 < n || pass == 0; ++pass) {
    std::vector<double> next(n, 0.0);
    next[0] = 1.0;
    for (std::size_t m = 0; m < n; ++m)
      for (const auto& [to, w] : ix.callees(chain.hops[m]))
        next[pos.at(to)] += chain.demand_coe[m] * w;
    if (next == chain.demand_coe) break;
    chain.demand_coe = std::move(next);
  }
  return chain;
}

inline FunctionChain calling_subgraph_to_chain(const ScenarioIndex& ix,
                                               const std::string& entry_id) {
  return calling_subgraph_to_chain(ix, ix.function_index(entry_id));
}

/// One chain per demanded function, sorted by entry id. This is the cached
/// chain set every evaluation and solver runs against.
inline std::vector<FunctionChain> build_demanded_chains(
    const ScenarioIndex& ix) {
  std::vector<FunctionChain> chains;
  chains.reserve(ix.demanded_functions().size());
  for (int f : ix.demanded_functions())
    chains.push_back(calling_subgraph_to_chain(ix, f));
  return chains;
}

/// Per-service request totals: gamma_u from users, gamma_s from other
/// services via ACFC-propagated chain demand.
struct DemandSummary {
  std::vector<double> gamma_u;
  std::vector<double> gamma_s;

  double total(int service) const {
    return gamma_u[service] + gamma_s[service];
  }
};

/// Aggregates user demand (per function rates) and service-to-service demand
/// (chain positions m >= 1 weighted by entry rate times demand_coe[m]).
/// Throws if a demanded function has no chain in `chains`.
inline DemandSummary demand_summary(const ScenarioIndex& ix,
                                    const std::vector<FunctionChain>& chains) {
  DemandSummary s;
  s.gamma_u.assign(ix.service_count(), 0.0);
  s.gamma_s.assign(ix.service_count(), 0.0);
  for (int f = 0; f < ix.function_count(); ++f)
    s.gamma_u[ix.service_of(f)] += ix.demand_total(f);

  std::vector<bool> covered(ix.function_count(), false);
  for (const auto& chain : chains) {
    covered[chain.entry] = true;
    const double entry_rate = ix.demand_total(chain.entry);
    for (std::size_t m = 1; m < chain.hops.size(); ++m)
      s.gamma_s[ix.service_of(chain.hops[m])] +=
          entry_rate * chain.demand_coe[m];
  }
  for (int f : ix.demanded_functions())
    if (!covered[f])
      throw std::invalid_argument("missing chain for demanded function '" +
                                  ix.function_id(f) + "'");
  return s;
}

}  // namespace msplace
