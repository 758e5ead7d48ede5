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

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "msplace/chains.hpp"
#include "msplace/model.hpp"

namespace msplace {

using ordered_json = nlohmann::ordered_json;

class ParseError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Scenario <-> JSON. The writer is canonical: parsing a file and re-writing
// it reproduces the bytes exactly.
// ---------------------------------------------------------------------------

inline ordered_json scenario_to_json(const Scenario& s) {
  ordered_json j;
  j["services"] = ordered_json::array();
  for (const auto& svc : s.services) {
    ordered_json fns = ordered_json::array();
    for (const auto& fn : svc.functions)
      fns.push_back({{"id", fn.id},
                     {"d_in_kb", fn.d_in_kb},
                     {"d_out_kb", fn.d_out_kb}});
    j["services"].push_back({{"id", svc.id},
                             {"mu", svc.mu},
                             {"resource", svc.resource},
                             {"functions", std::move(fns)}});
  }
  j["dependencies"] = ordered_json::array();
  for (const auto& e : s.dependencies.edges)
    j["dependencies"].push_back(
        {{"from", e.from}, {"to", e.to}, {"acfc", e.acfc}});
  j["servers"] = ordered_json::array();
  for (const auto& srv : s.servers)
    j["servers"].push_back({{"id", srv.id}, {"resource", srv.resource}});

  ordered_json delay = ordered_json::array();
  for (const auto& row : s.network.delay_ms) delay.push_back(row);
  ordered_json bw = ordered_json::array();
  for (std::size_t i = 0; i < s.network.bandwidth_mbps.size(); ++i) {
    ordered_json row = ordered_json::array();
    for (std::size_t k = 0; k < s.network.bandwidth_mbps[i].size(); ++k) {
      const double v = s.network.bandwidth_mbps[i][k];
      if (i == k && v == kIntraBandwidth)
        row.push_back(nullptr);
      else
        row.push_back(v);
    }
    bw.push_back(std::move(row));
  }
  j["network"] = {{"delay_ms", std::move(delay)},
                  {"bandwidth_mbps", std::move(bw)}};

  j["demand"] = ordered_json::array();
  for (const auto& d : s.demand.entries)
    j["demand"].push_back(
        {{"function", d.function}, {"server", d.server}, {"rate", d.rate}});
  j["cost"] = {{"unit_cost", s.cost.unit_cost},
               {"max_cost", s.cost.max_cost}};
  return j;
}

inline Scenario scenario_from_json(const ordered_json& j) {
  try {
    Scenario s;
    for (const auto& js : j.at("services")) {
      ServiceSpec svc;
      svc.id = js.at("id").get<std::string>();
      svc.mu = js.at("mu").get<double>();
      svc.resource = js.at("resource").get<double>();
      for (const auto& jf : js.at("functions"))
        svc.functions.push_back({jf.at("id").get<std::string>(),
                                 jf.at("d_in_kb").get<double>(),
                                 jf.at("d_out_kb").get<double>()});
      s.services.push_back(std::move(svc));
    }
    for (const auto& je : j.at("dependencies"))
      s.dependencies.edges.push_back({je.at("from").get<std::string>(),
                                      je.at("to").get<std::string>(),
                                      je.at("acfc").get<double>()});
    for (const auto& jn : j.at("servers"))
      s.servers.push_back(
          {jn.at("id").get<std::string>(), jn.at("resource").get<double>()});

    const auto& jnet = j.at("network");
    for (const auto& row : jnet.at("delay_ms"))
      s.network.delay_ms.push_back(row.get<std::vector<double>>());
    for (const auto& row : jnet.at("bandwidth_mbps")) {
      std::vector<double> r;
      for (const auto& v : row)
        r.push_back(v.is_null() ? kIntraBandwidth : v.get<double>());
      s.network.bandwidth_mbps.push_back(std::move(r));
    }

    for (const auto& jd : j.at("demand"))
      s.demand.entries.push_back({jd.at("function").get<std::string>(),
                                  jd.at("server").get<std::string>(),
                                  jd.at("rate").get<double>()});
    s.cost.unit_cost = j.at("cost").at("unit_cost").get<double>();
    s.cost.max_cost = j.at("cost").at("max_cost").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed scenario: ") + e.what());
  }
}

inline std::string serialize_scenario(const Scenario& s) {
  return scenario_to_json(s).dump(2) + "\n";
}

inline Scenario parse_scenario(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

// ---------------------------------------------------------------------------
// Deployment scheme <-> JSON
// ---------------------------------------------------------------------------

inline ordered_json scheme_to_json(const DeploymentScheme& x,
                                   const ScenarioIndex& ix) {
  ordered_json j;
  j["x"] = x.x;
  j["servers"] = ordered_json::array();
  for (int k = 0; k < ix.server_count(); ++k)
    j["servers"].push_back(ix.server_id(k));
  j["services"] = ordered_json::array();
  for (int i = 0; i < ix.service_count(); ++i)
    j["services"].push_back(ix.service_id(i));
  return j;
}

/// Parses a scheme and aligns its rows/columns with the scenario's server
/// and service order. Throws ParseError on unknown ids, missing ids or a
/// dimension mismatch.
inline DeploymentScheme scheme_from_json(const ordered_json& j,
                                         const ScenarioIndex& ix) {
  try {
    const auto raw = j.at("x").get<std::vector<std::vector<long long>>>();
    const auto servers = j.at("servers").get<std::vector<std::string>>();
    const auto services = j.at("services").get<std::vector<std::string>>();
    if (static_cast<int>(servers.size()) != ix.server_count() ||
        static_cast<int>(services.size()) != ix.service_count())
      throw ParseError("scheme dimension mismatch with scenario");
    if (raw.size() != servers.size())
      throw ParseError("scheme dimension mismatch: row count");
    if (std::set<std::string>(servers.begin(), servers.end()).size() !=
            servers.size() ||
        std::set<std::string>(services.begin(), services.end()).size() !=
            services.size())
      throw ParseError("scheme labels must be unique");
    DeploymentScheme x =
        make_zero_scheme(ix.server_count(), ix.service_count());
    for (std::size_t r = 0; r < raw.size(); ++r) {
      if (raw[r].size() != services.size())
        throw ParseError("scheme dimension mismatch: column count");
      const int server = ix.server_index(servers[r]);
      for (std::size_t c = 0; c < raw[r].size(); ++c) {
        if (raw[r][c] < 0) throw ParseError("instance counts must be >= 0");
        x.x[server][ix.service_index(services[c])] = raw[r][c];
      }
    }
    return x;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed scheme: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("malformed scheme: ") + e.what());
  }
}

inline std::string serialize_scheme(const DeploymentScheme& x,
                                    const ScenarioIndex& ix) {
  return scheme_to_json(x, ix).dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Evaluation report -> JSON
// ---------------------------------------------------------------------------

inline ordered_json report_to_json(const EvaluationReport& r) {
  ordered_json j;
  j["t_system_ms"] = r.t_system_ms;
  ordered_json per = ordered_json::object();
  for (const auto& [id, t] : r.per_function) per[id] = t;
  j["per_function"] = std::move(per);
  j["constraints_ok"] = r.constraints_ok;
  j["violations"] = ordered_json::array();
  for (const auto& v : r.violations)
    j["violations"].push_back({{"constraint", v.constraint},
                               {"entity", v.entity},
                               {"margin", v.margin}});
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  return j;
}

/// Debug view of the cached chains: hop ids plus link flags.
inline ordered_json chains_to_json(const std::vector<FunctionChain>& chains,
                                   const ScenarioIndex& ix) {
  ordered_json out = ordered_json::array();
  for (const auto& chain : chains) {
    ordered_json jc;
    jc["entry"] = ix.function_id(chain.entry);
    ordered_json hops = ordered_json::array();
    for (int fn : chain.hops) hops.push_back(ix.function_id(fn));
    jc["hops"] = std::move(hops);
    jc["hop_acfc"] = chain.hop_acfc;
    ordered_json flags = ordered_json::array();
    for (bool v : chain.virtual_link) flags.push_back(v);
    jc["virtual"] = std::move(flags);
    jc["demand_coe"] = chain.demand_coe;
    out.push_back(std::move(jc));
  }
  return out;
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
}

inline Scenario load_scenario(const std::string& path) {
  return parse_scenario(read_file(path));
}

}  // namespace msplace
