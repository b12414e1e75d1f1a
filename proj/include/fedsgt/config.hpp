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

#ifndef FEDSGT_CONFIG_HPP
#define FEDSGT_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedsgt/core_types.hpp"
#include "fedsgt/dataset.hpp"
#include "fedsgt/fltrain.hpp"
#include "fedsgt/unlearn.hpp"

namespace fedsgt {

inline constexpr const char* kToolVersion = "1.0.0";

struct DatasetSpec {
  enum class Kind { Synthetic, Csv };
  Kind kind = Kind::Synthetic;
  SynthSpec synth;
  bool non_iid = false;
  double alpha = 0.3;
  std::string csv_path;
  std::string manifest_path;
};

struct RequestSpec {
  std::size_t count = 30;
  std::uint64_t seed = 1;
  std::size_t records = kDefaultRequestRecords;
  std::vector<UnlearnRequest> list;  // explicit targets, used when nonempty
  std::vector<GroupId> groups;       // scripted group deletions, used when nonempty
};

/// Resolved run configuration; defaults match the reference experimental setup.
struct RunConfig {
  std::string experiment = "default";
  std::uint64_t seed = 0;
  std::size_t N = 10;  // clients
  std::size_t S = 5;   // slices per client
  std::size_t L = 10;
  std::size_t B = 10;
  std::size_t c = 5;
  Strategy strategy = Strategy::AllSeq;
  DatasetSpec dataset;
  TrainConfig trainer;
  RequestSpec requests;
  std::vector<std::string> methods{"FedSGT", "FedCIO", "FedRetrain"};
  bool fedcio_retrain = false;
  std::size_t retrain_stride = 5;
  std::string out = "out";
  std::size_t workers = 1;

  nlohmann::ordered_json to_json() const;
  SynthSpec synth_spec() const;
};

struct ConfigResult {
  std::optional<RunConfig> config;
  std::vector<std::string> errors;

  bool ok() const { return config.has_value(); }
};

/// Parses and range-checks a raw config document. Every problem is
/// collected; nothing short-circuits on the first error.
ConfigResult validate_config(const nlohmann::json& raw);
ConfigResult load_config_file(const std::string& path);

/// Synthetic generator or CSV ingestion, as the config says.
Dataset build_dataset(const RunConfig& cfg);

}  // namespace fedsgt

#endif  // FEDSGT_CONFIG_HPP
