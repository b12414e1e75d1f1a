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

#include "fedsgt/report.hpp"

#include <charconv>
#include <cmath>
#include <iterator>

namespace fedsgt::report {

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return ec == std::errc() ? std::string(buf, end) : std::to_string(value);
}

std::string number(const std::optional<double>& value) {
  return value ? number(*value) : std::string();
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::trunc), columns_(header.size()) {
  if (!out_) throw io_error("cannot write " + path);
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw io_error("CSV row has the wrong number of fields");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_field(fields[i]);
  }
  out_ << "\r\n";
}

void write_timeline_csv(const std::string& path, const Timeline& timeline) {
  CsvWriter csv(path, kTimelineHeader);
  for (const auto& r : timeline) {
    std::string notes = r.notes;
    if (!notes.empty()) notes += "; ";
    notes += "remaining=" + std::to_string(r.remaining_samples);
    csv.row({std::to_string(r.step), r.method, r.affected_unit, to_string(r.status.tag),
             number(r.utility), r.surviving, notes});
  }
}

nlohmann::ordered_json timeline_json(const Timeline& timeline) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : timeline) {
    nlohmann::ordered_json row;
    row["step"] = r.step;
    row["method"] = r.method;
    row["affected_unit"] = r.affected_unit;
    row["status"] = to_string(r.status.tag);
    row["utility"] = r.utility ? nlohmann::ordered_json(*r.utility) : nlohmann::ordered_json();
    row["remaining_samples"] = r.remaining_samples;
    row["surviving"] = r.surviving;
    row["notes"] = r.notes;
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::ordered_json timeline_summary(const Timeline& timeline,
                                        const std::optional<AuditReport>& audit) {
  nlohmann::ordered_json doc;
  const auto fail = failure_step(timeline);
  doc["failure_step"] = fail ? nlohmann::ordered_json(*fail) : nlohmann::ordered_json();
  const auto mean = mean_utility(timeline);
  doc["mean_utility"] = mean ? nlohmann::ordered_json(*mean) : nlohmann::ordered_json();
  if (audit) {
    doc["audit"] = audit->pass ? "pass" : "fail";
    doc["audit_detail"] = audit->message;
  } else {
    doc["audit"] = nullptr;
  }
  return doc;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write " + path);
  out << text;
}

void write_json(const std::string& path, const nlohmann::ordered_json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fedsgt::report
