/*
 * Copyright 2026 The FedSGT Simulator Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// fedsgt: closed-form analysis, Monte Carlo validation, training and
// unlearning simulation from one binary.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedsgt/commands.hpp"
#include "fedsgt/report.hpp"

namespace {

using namespace fedsgt;
using namespace fedsgt::cli;

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration")->required();
  cmd->add_option("--seed", f.seed, "override the configured seed");
  cmd->add_option("--workers", f.workers, "worker threads");
  cmd->add_option("--out", f.out, "output directory");
}

// Overrides are applied to the raw document so they go through the same
// validation as the file itself.
std::optional<RunConfig> resolve_config(const RunFlags& f, std::ostream& log) {
  nlohmann::json raw;
  try {
    raw = nlohmann::json::parse(report::read_text(f.config));
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return std::nullopt;
  } catch (const nlohmann::json::exception& e) {
    log << "error: " << f.config << ": " << e.what() << "\n";
    return std::nullopt;
  }
  if (!raw.is_object()) {
    log << "error: " << f.config << ": top level must be an object\n";
    return std::nullopt;
  }
  // A manifest written by an earlier run carries its resolved config.
  if (raw.contains("tool") && raw.contains("config")) raw = raw["config"];
  if (f.seed) raw["seed"] = *f.seed;
  if (f.workers) raw["workers"] = *f.workers;
  if (f.out) raw["out"] = *f.out;
  ConfigResult res = validate_config(raw);
  for (const auto& e : res.errors) log << "config error: " << e << "\n";
  return res.config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated sequential group training simulator"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  // analyze
  AnalyzeOptions an;
  auto* analyze_cmd = app.add_subcommand("analyze", "closed-form deletion, cost and remaining-data tables");
  analyze_cmd->add_option("--L", an.params.L, "groups")->capture_default_str();
  analyze_cmd->add_option("--B", an.params.B, "training budget")->capture_default_str();
  analyze_cmd->add_option("--c", an.params.c, "FedCIO clusters")->capture_default_str();
  analyze_cmd->add_option("--D", an.params.D, "training samples")->capture_default_str();
  analyze_cmd->add_option("--S", an.params.S, "slices per client")->capture_default_str();
  analyze_cmd->add_option("--N", an.params.N, "clients")->capture_default_str();
  analyze_cmd->add_option("--T", an.params.T, "baseline rounds")->capture_default_str();
  analyze_cmd->add_option("--E", an.params.E, "local epochs")->capture_default_str();
  analyze_cmd->add_option("--P", an.params.P, "parameters per adapter")->capture_default_str();
  analyze_cmd->add_option("--r-max", an.r_max, "last request count on the remaining-data curve")
      ->capture_default_str();
  analyze_cmd->add_option("--t-cluster", an.t_cluster, "FedCIO clustering rounds")
      ->capture_default_str();
  analyze_cmd->add_option("--out", an.out, "output directory")->capture_default_str();

  // validate
  ValidateOptions va;
  auto* validate_cmd = app.add_subcommand("validate", "Monte Carlo check of every closed form");
  validate_cmd->add_option("--trials", va.mc.trials, "trials per quantity")->capture_default_str();
  validate_cmd->add_option("--seed", va.mc.seed, "PRNG seed")->capture_default_str();
  validate_cmd->add_option("--k", va.mc.confidence_k, "allowed |z|")->capture_default_str();
  validate_cmd->add_option("--workers", va.mc.workers, "worker threads")->capture_default_str();
  validate_cmd->add_option("--D", va.grid.D, "training samples for remaining-data rows")
      ->capture_default_str();
  validate_cmd->add_option("--out", va.out, "output directory")->capture_default_str();

  // train
  RunFlags tr;
  auto* train_cmd = app.add_subcommand("train", "train every sequence and write the module bank");
  add_run_flags(train_cmd, tr);

  // unlearn
  UnlearnOptions un;
  std::optional<std::size_t> req_count;
  std::optional<std::uint64_t> req_seed;
  std::optional<std::size_t> req_records;
  std::vector<std::uint32_t> req_groups;
  std::string strategy_name;
  auto* unlearn_cmd = app.add_subcommand("unlearn", "replay a deletion stream against a trained bank");
  unlearn_cmd->add_option("--bank", un.bank_path, "module bank file")->required();
  unlearn_cmd->add_option("--manifest", un.manifest_path, "manifest (default: beside the bank)");
  unlearn_cmd->add_option("--requests", req_count, "number of uniform requests");
  unlearn_cmd->add_option("--request-seed", req_seed, "seed of the request stream");
  unlearn_cmd->add_option("--records", req_records, "records removed per request");
  unlearn_cmd->add_option("--groups", req_groups, "scripted group deletions, in order");
  unlearn_cmd->add_option("--strategy", strategy_name, "AllSeq, MinSeq or LongSeq");
  unlearn_cmd->add_flag("--audit", un.audit, "retrain-and-compare audit at stream end");
  unlearn_cmd->add_option("--resume", un.resume, "state.json from an earlier run");
  unlearn_cmd->add_option("--out", un.out, "output directory")->capture_default_str();

  // compare
  RunFlags cmp;
  auto* compare_cmd = app.add_subcommand("compare", "FedSGT, FedCIO and FedRetrain on one stream");
  add_run_flags(compare_cmd, cmp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(kExitConfig);
  }

  std::ostream& log = std::cerr;
  if (*analyze_cmd) return cmd_analyze(an, log);
  if (*validate_cmd) return cmd_validate(va, log);
  if (*train_cmd) {
    auto cfg = resolve_config(tr, log);
    return cfg ? cmd_train(*cfg, log) : static_cast<int>(kExitConfig);
  }
  if (*compare_cmd) {
    auto cfg = resolve_config(cmp, log);
    return cfg ? cmd_compare(*cfg, log) : static_cast<int>(kExitConfig);
  }
  if (*unlearn_cmd) {
    try {
      if (!strategy_name.empty()) un.strategy = parse_strategy(strategy_name);
    } catch (const Error& e) {
      log << "error: " << e.what() << "\n";
      return kExitConfig;
    }
    if (req_count || req_seed || req_records || !req_groups.empty()) {
      RequestSpec spec;
      if (req_count) spec.count = *req_count;
      if (req_seed) spec.seed = *req_seed;
      if (req_records) spec.records = *req_records;
      for (auto g : req_groups) spec.groups.emplace_back(g);
      un.requests = spec;
    }
    return cmd_unlearn(un, log);
  }
  return kExitConfig;
}
