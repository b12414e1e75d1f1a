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

#ifndef FEDSGT_COMMANDS_HPP
#define FEDSGT_COMMANDS_HPP

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedsgt/analytics.hpp"
#include "fedsgt/config.hpp"
#include "fedsgt/montecarlo.hpp"

namespace fedsgt::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitValidation = 3,
  kExitCorrupt = 4,
  kExitTraining = 5,
};

int exit_code_for(const Error& e);

struct AnalyzeOptions {
  analytics::AnalyticParams params;
  std::uint64_t r_max = 25;
  std::uint64_t t_cluster = 2;
  std::string out = "out";
};

struct AnalyzeReport {
  double delta_fedsgt = 0.0;
  double delta_fedcio = 0.0;
  double delta_ratio = 0.0;
  double matched_budget = 0.0;
  double comm_fedsgt = 0.0;  // rounds per client over the B trained sequences
  double comm_fedcio = 0.0;
  double comm_fedavg = 0.0;
  std::vector<double> remaining_fedsgt;  // index r = 0..r_max
  std::vector<double> remaining_fedcio;
  nlohmann::ordered_json json;
};

AnalyzeReport analyze(const AnalyzeOptions& opts);
int cmd_analyze(const AnalyzeOptions& opts, std::ostream& log);

struct ValidateOptions {
  montecarlo::MCConfig mc;
  montecarlo::ValidationGrid grid;
  std::string out = "out";
  montecarlo::ClosedFormFilter filter;
};

int cmd_validate(const ValidateOptions& opts, std::ostream& log);

struct TrainOutcome {
  Dataset data;
  GroupingPlan plan;
  SequenceSet seqs;
  ModuleBank bank;
  TrainStats stats;
  std::vector<double> sequence_accuracy;
};

TrainOutcome run_training(const RunConfig& cfg);
int cmd_train(const RunConfig& cfg, std::ostream& log);

struct UnlearnOptions {
  std::string bank_path;
  std::string manifest_path;  // defaults to manifest.json beside the bank
  std::optional<RequestSpec> requests;
  std::optional<Strategy> strategy;
  bool audit = false;
  std::string out = "out";
  std::optional<std::string> resume;
};

int cmd_unlearn(const UnlearnOptions& opts, std::ostream& log);

int cmd_compare(const RunConfig& cfg, std::ostream& log);

/// Requests described by a spec: scripted groups, an explicit list, or the
/// seeded uniform generator, in that order of precedence.
std::vector<UnlearnRequest> resolve_requests(const RequestSpec& spec, const GroupingPlan& plan);

}  // namespace fedsgt::cli

#endif  // FEDSGT_COMMANDS_HPP
