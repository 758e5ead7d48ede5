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
// Command-line harness: scenario generation, solving, scheme evaluation and
// batch comparison. Exit codes: 0 success/feasible, 1 infeasible, 2 input
// error.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msplace/evaluator.hpp"
#include "msplace/generator.hpp"
#include "msplace/json_io.hpp"
#include "msplace/model.hpp"
#include "msplace/solvers.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitInputError = 2;

using msplace::ordered_json;

struct CommonFlags {
  std::string algorithm = "bd-qsrfp";
  std::string mode = "qsrfp";
  std::string service_order = "pseudocode";
  bool improve = false;
  std::uint64_t seed = 1;
  int trials = 100;
  long long guard = msplace::kDefaultPathGuard;
};

msplace::SolveOptions to_options(const CommonFlags& f) {
  msplace::SolveOptions opt;
  opt.improve = f.improve;
  opt.service_order = f.service_order == "prose"
                          ? msplace::ServiceOrder::kProse
                          : msplace::ServiceOrder::kPseudocode;
  opt.seed = f.seed;
  opt.trials = f.trials;
  opt.guard = f.guard;
  return opt;
}

// Loads and validates a scenario file; throws ParseError with the full
// diagnostic list on invalid input.
msplace::Scenario load_checked(const std::string& path) {
  msplace::Scenario s = msplace::load_scenario(path);
  const auto errors = msplace::validate_scenario(s);
  if (!errors.empty()) {
    std::string all = "invalid scenario " + path + ":";
    for (const auto& e : errors) all += "\n  " + e;
    throw msplace::ParseError(all);
  }
  return s;
}

ordered_json result_to_json(const msplace::SolverResult& r,
                            const msplace::ScenarioIndex& ix) {
  ordered_json j;
  j["algorithm"] = r.algorithm;
  if (!r.service_order.empty()) j["service_order"] = r.service_order;
  j["feasible"] = r.feasible;
  j["t_system_ms"] = r.t_system_ms;  // NaN serializes as null
  j["wall_ms"] = r.wall_ms;
  j["instances"] = msplace::total_instances(r.scheme);
  if (!r.error.empty()) j["error"] = r.error;
  if (r.algorithm == "random") {
    j["t_best_ms"] = r.t_best_ms;
    j["t_variance"] = r.t_variance;
    j["feasible_trials"] = r.feasible_trials;
  }
  j["scheme"] = msplace::scheme_to_json(r.scheme, ix);
  return j;
}

void emit(const ordered_json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty() || out_path == "-")
    std::cout << text;
  else
    msplace::write_file(out_path, text);
}

// Deterministic CSV double format (shortest round-trip repr).
std::string csv_double(double v) {
  if (std::isnan(v)) return "nan";
  return nlohmann::json(v).dump();
}

// Minimal glob over the filename component ('*' and '?').
std::vector<std::string> expand_scenarios(const std::vector<std::string>& args) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  for (const auto& arg : args) {
    if (arg.find('*') == std::string::npos &&
        arg.find('?') == std::string::npos) {
      files.push_back(arg);
      continue;
    }
    const fs::path pattern(arg);
    const fs::path dir =
        pattern.parent_path().empty() ? "." : pattern.parent_path();
    const std::string name = pattern.filename().string();
    auto matches = [&name](const std::string& candidate) {
      // recursive wildcard match
      std::function<bool(std::size_t, std::size_t)> rec =
          [&](std::size_t p, std::size_t c) -> bool {
        while (p < name.size()) {
          if (name[p] == '*') {
            for (std::size_t skip = c; skip <= candidate.size(); ++skip)
              if (rec(p + 1, skip)) return true;
            return false;
          }
          if (c >= candidate.size()) return false;
          if (name[p] != '?' && name[p] != candidate[c]) return false;
          ++p;
          ++c;
        }
        return c == candidate.size();
      };
      return rec(0, 0);
    };
    if (fs::is_directory(dir))
      for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() &&
            matches(entry.path().filename().string()))
          files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  return files;
}

int cmd_generate(const msplace::GeneratorConfig& cfg,
                 const std::string& out_path) {
  const msplace::Scenario s = msplace::generate_scenario(cfg);
  msplace::write_file(out_path, msplace::serialize_scenario(s));
  msplace::ScenarioIndex ix(s);
  std::cout << "wrote " << out_path << ": " << ix.server_count()
            << " servers, " << ix.service_count() << " services, "
            << ix.demanded_functions().size() << " demanded functions, "
            << "total rate " << ix.demand_grand_total() << "\n";
  return kExitOk;
}

int cmd_solve(const std::string& scenario_path, const CommonFlags& flags,
              const std::string& out_path, const std::string& scheme_out) {
  const msplace::Scenario s = load_checked(scenario_path);
  const msplace::PreparedScenario prepared(s);
  const msplace::SolverResult result =
      msplace::solve(prepared, flags.algorithm, to_options(flags));

  ordered_json j = result_to_json(result, prepared.index);
  try {
    j["report"] = msplace::report_to_json(msplace::system_average_time(
        result.scheme, prepared.index, prepared.chains,
        flags.mode == "fpp" ? msplace::EvalMode::kFpp
                            : msplace::EvalMode::kQsrfp,
        flags.guard));
  } catch (const msplace::Error&) {
    // partial schemes from aborted runs may not be evaluable
  }
  emit(j, out_path);
  if (!scheme_out.empty())
    msplace::write_file(
        scheme_out, msplace::serialize_scheme(result.scheme, prepared.index));
  return result.feasible ? kExitOk : kExitInfeasible;
}

int cmd_evaluate(const std::string& scenario_path,
                 const std::string& scheme_path, const CommonFlags& flags,
                 const std::string& out_path, bool dump_chains) {
  const msplace::Scenario s = load_checked(scenario_path);
  const msplace::PreparedScenario prepared(s);
  const msplace::DeploymentScheme x = msplace::scheme_from_json(
      ordered_json::parse(msplace::read_file(scheme_path)), prepared.index);
  const msplace::EvaluationReport report = msplace::system_average_time(
      x, prepared.index, prepared.chains,
      flags.mode == "fpp" ? msplace::EvalMode::kFpp
                          : msplace::EvalMode::kQsrfp,
      flags.guard);
  ordered_json j = msplace::report_to_json(report);
  if (dump_chains)
    j["chains"] = msplace::chains_to_json(prepared.chains, prepared.index);
  emit(j, out_path);
  return kExitOk;
}

int cmd_compare(const std::vector<std::string>& scenario_args,
                const std::string& algorithms_arg, const CommonFlags& flags,
                const std::string& out_path) {
  const std::vector<std::string> files = expand_scenarios(scenario_args);
  if (files.empty()) {
    std::cerr << "compare: no scenario files matched\n";
    return kExitInputError;
  }
  std::vector<std::string> algorithms;
  std::stringstream ss(algorithms_arg);
  for (std::string a; std::getline(ss, a, ',');)
    if (!a.empty()) algorithms.push_back(a);
  if (algorithms.empty()) {
    std::cerr << "compare: no algorithms given\n";
    return kExitInputError;
  }

  std::ostringstream csv;
  csv << "seed,algorithm,t_ms,wall_ms,feasible,instances\n";
  for (const auto& file : files) {
    const std::string stem = std::filesystem::path(file).stem().string();
    std::vector<msplace::SolverResult> results;
    try {
      const msplace::Scenario s = load_checked(file);
      const msplace::PreparedScenario prepared(s);
      for (const auto& algorithm : algorithms)
        results.push_back(
            msplace::solve(prepared, algorithm, to_options(flags)));
    } catch (const std::exception& e) {
      std::cerr << "compare: " << file << ": " << e.what() << "\n";
      results.clear();
      for (const auto& algorithm : algorithms) {
        msplace::SolverResult failed;
        failed.algorithm = algorithm;
        failed.error = e.what();
        results.push_back(std::move(failed));
      }
    }
    for (const auto& r : results)
      csv << stem << ',' << r.algorithm << ',' << csv_double(r.t_system_ms)
          << ',' << csv_double(r.wall_ms) << ',' << (r.feasible ? 1 : 0)
          << ',' << msplace::total_instances(r.scheme) << '\n';
  }
  msplace::write_file(out_path, csv.str());
  std::cout << "wrote " << out_path << " (" << files.size() << " scenarios x "
            << algorithms.size() << " algorithms)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Service placement for microservice systems"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a random scenario");
  std::string config_path;
  std::string gen_out = "scenario.json";
  msplace::GeneratorConfig cfg;
  gen->add_option("--config", config_path, "Generator config JSON");
  gen->add_option("--seed", cfg.seed, "RNG seed");
  gen->add_option("--servers", cfg.n_servers, "Server count");
  gen->add_option("--services", cfg.n_services, "Service count");
  gen->add_option("--entries", cfg.n_entries,
                  "User requirement categories (0 = services/4)");
  gen->add_option("--users", cfg.user_count, "Total user count");
  gen->add_option("-o,--out", gen_out, "Output scenario path");

  // shared solve/evaluate/compare flags
  CommonFlags flags;
  auto add_common = [&flags](CLI::App* cmd, bool with_algorithm) {
    if (with_algorithm)
      cmd->add_option("--algorithm", flags.algorithm, "Solver")
          ->check(CLI::IsMember(
              {"b-qsrfp", "d-qsrfp", "bd-qsrfp", "random", "optimal"}));
    cmd->add_option("--mode", flags.mode, "Evaluation mode")
        ->check(CLI::IsMember({"qsrfp", "fpp"}));
    cmd->add_flag("--improve", flags.improve,
                  "Greedy post-pass adding instances while T(X) decreases");
    cmd->add_option("--seed", flags.seed, "RNG seed (random baseline)");
    cmd->add_option("--trials", flags.trials, "Random baseline trials");
    cmd->add_option("--service-order", flags.service_order,
                    "B-QSRFP selection order")
        ->check(CLI::IsMember({"pseudocode", "prose"}));
    cmd->add_option("--guard", flags.guard,
                    "State guard for fpp/optimal enumeration");
  };

  auto* solve = app.add_subcommand("solve", "Compute a deployment scheme");
  std::string solve_scenario;
  std::string solve_out;
  std::string scheme_out;
  solve->add_option("scenario", solve_scenario, "Scenario JSON")->required();
  add_common(solve, true);
  solve->add_option("-o,--out", solve_out, "Result JSON path (default stdout)");
  solve->add_option("--scheme-out", scheme_out, "Also write the bare scheme");

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a given scheme");
  std::string eval_scenario;
  std::string eval_scheme;
  std::string eval_out;
  bool eval_chains = false;
  evaluate->add_option("scenario", eval_scenario, "Scenario JSON")->required();
  evaluate->add_option("--scheme", eval_scheme, "Scheme JSON")->required();
  add_common(evaluate, false);
  evaluate->add_option("-o,--out", eval_out, "Report path (default stdout)");
  evaluate->add_flag("--chains", eval_chains, "Include chain debug info");

  auto* compare = app.add_subcommand("compare", "Run algorithms over scenarios");
  std::vector<std::string> compare_scenarios;
  std::string algorithms = "b-qsrfp,d-qsrfp,bd-qsrfp,random";
  std::string compare_out = "results.csv";
  compare->add_option("scenarios", compare_scenarios, "Scenario files or glob")
      ->required();
  compare->add_option("--algorithms", algorithms, "Comma-separated list");
  add_common(compare, false);
  compare->add_option("-o,--out", compare_out, "Output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      if (!config_path.empty()) {
        msplace::GeneratorConfig file_cfg = msplace::generator_config_from_json(
            ordered_json::parse(msplace::read_file(config_path)));
        // explicit flags override the config file
        for (const auto* opt : gen->get_options()) {
          if (opt->count() == 0) continue;
          const std::string name = opt->get_name();
          if (name == "--seed") file_cfg.seed = cfg.seed;
          if (name == "--servers") file_cfg.n_servers = cfg.n_servers;
          if (name == "--services") file_cfg.n_services = cfg.n_services;
          if (name == "--entries") file_cfg.n_entries = cfg.n_entries;
          if (name == "--users") file_cfg.user_count = cfg.user_count;
        }
        cfg = file_cfg;
      }
      return cmd_generate(cfg, gen_out);
    }
    if (solve->parsed())
      return cmd_solve(solve_scenario, flags, solve_out, scheme_out);
    if (evaluate->parsed())
      return cmd_evaluate(eval_scenario, eval_scheme, flags, eval_out,
                          eval_chains);
    if (compare->parsed())
      return cmd_compare(compare_scenarios, algorithms, flags, compare_out);
  } catch (const msplace::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const msplace::EnumerationGuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const msplace::UndefinedRoutingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}
