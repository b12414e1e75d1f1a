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

#ifndef FEDSGT_REPORT_HPP
#define FEDSGT_REPORT_HPP

#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fedsgt/unlearn.hpp"

namespace fedsgt::report {

/// RFC-4180 field: quoted when it holds a comma, quote or line break.
std::string csv_field(std::string_view value);
/// Shortest round-trip decimal form; empty for missing values.
std::string number(double value);
std::string number(const std::optional<double>& value);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

inline const std::vector<std::string> kTimelineHeader{
    "step", "method", "affected_unit", "status", "utility", "surviving", "notes"};

void write_timeline_csv(const std::string& path, const Timeline& timeline);
nlohmann::ordered_json timeline_json(const Timeline& timeline);

/// {failure_step, mean_utility, audit}
nlohmann::ordered_json timeline_summary(const Timeline& timeline,
                                        const std::optional<AuditReport>& audit);

void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const nlohmann::ordered_json& doc);
std::string read_text(const std::string& path);

}  // namespace fedsgt::report

#endif  // FEDSGT_REPORT_HPP
