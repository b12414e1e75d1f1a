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

#include "fedsgt/config.hpp"

#include <fstream>
#include <set>

namespace fedsgt {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

/// Reads the fields of one config object, appending to a shared error list.
class Section {
 public:
  Section(const json& obj, std::string path, std::vector<std::string>& errors,
          std::set<std::string> allowed)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (!obj_.is_object()) {
      fail("must be an object");
      valid_ = false;
      return;
    }
    for (const auto& [key, value] : obj_.items()) {
      if (!allowed.count(key)) errors_.push_back("unknown key '" + qualified(key) + "'");
    }
  }

  bool has(const std::string& key) const { return valid_ && obj_.contains(key); }
  const json& raw(const std::string& key) const { return obj_.at(key); }
  std::string qualified(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void count(const std::string& key, std::size_t& target, std::size_t min = 1) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min)) {
      errors_.push_back("'" + qualified(key) + "' must be an integer >= " + std::to_string(min));
      return;
    }
    target = v.get<std::size_t>();
  }

  void seed(const std::string& key, std::uint64_t& target) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      errors_.push_back("'" + qualified(key) + "' must be a non-negative integer");
      return;
    }
    target = v.get<std::uint64_t>();
  }

  void positive(const std::string& key, double& target, bool allow_zero = false) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number() || v.get<double>() < 0.0 || (!allow_zero && v.get<double>() == 0.0)) {
      errors_.push_back("'" + qualified(key) + "' must be a " +
                        (allow_zero ? "non-negative" : "positive") + " number");
      return;
    }
    target = v.get<double>();
  }

  void text(const std::string& key, std::string& target) {
    if (!has(key)) return;
    if (!obj_.at(key).is_string()) {
      errors_.push_back("'" + qualified(key) + "' must be a string");
      return;
    }
    target = obj_.at(key).get<std::string>();
  }

  void flag(const std::string& key, bool& target) {
    if (!has(key)) return;
    if (!obj_.at(key).is_boolean()) {
      errors_.push_back("'" + qualified(key) + "' must be true or false");
      return;
    }
    target = obj_.at(key).get<bool>();
  }

  void fail(const std::string& what) { errors_.push_back("'" + path_ + "' " + what); }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  bool valid_ = true;
};

}  // namespace

SynthSpec RunConfig::synth_spec() const {
  SynthSpec s = dataset.synth;
  s.clients = N;
  s.slices_per_client = S;
  s.seed = seed;
  s.alpha = dataset.non_iid ? std::optional<double>(dataset.alpha) : std::nullopt;
  return s;
}

ordered_json RunConfig::to_json() const {
  ordered_json doc;
  doc["experiment"] = experiment;
  doc["seed"] = seed;
  doc["N"] = N;
  doc["S"] = S;
  doc["L"] = L;
  doc["B"] = B;
  doc["c"] = c;
  doc["strategy"] = to_string(strategy);
  ordered_json ds;
  if (dataset.kind == DatasetSpec::Kind::Synthetic) {
    ds["type"] = "synthetic";
    ds["d"] = dataset.synth.feature_dim;
    ds["k"] = dataset.synth.label_count;
    ds["samples_per_client"] = dataset.synth.samples_per_client;
    ds["non_iid"] = dataset.non_iid;
    ds["alpha"] = dataset.alpha;
    ds["separation"] = dataset.synth.separation;
    ds["noise"] = dataset.synth.noise;
    ds["test_samples"] = dataset.synth.test_samples;
  } else {
    ds["type"] = "csv";
    ds["path"] = dataset.csv_path;
    ds["manifest"] = dataset.manifest_path;
  }
  doc["dataset"] = std::move(ds);
  doc["trainer"] = {{"E", trainer.epochs},
                    {"lr", trainer.learning_rate},
                    {"batch", trainer.batch_size},
                    {"rounds_per_phase", trainer.rounds_per_phase},
                    {"T", trainer.baseline_rounds},
                    {"backbone_scale", trainer.backbone_scale}};
  ordered_json req;
  req["count"] = requests.count;
  req["seed"] = requests.seed;
  req["records"] = requests.records;
  if (!requests.list.empty()) {
    ordered_json list = ordered_json::array();
    for (const auto& r : requests.list) {
      list.push_back({{"client", r.target.client.value},
                      {"slice", r.target.slice.value},
                      {"records", r.record_count}});
    }
    req["list"] = std::move(list);
  }
  if (!requests.groups.empty()) {
    ordered_json groups = ordered_json::array();
    for (GroupId g : requests.groups) groups.push_back(g.value);
    req["groups"] = std::move(groups);
  }
  doc["requests"] = std::move(req);
  doc["methods"] = methods;
  doc["fedcio"] = {{"retrain", fedcio_retrain}};
  doc["retrain_stride"] = retrain_stride;
  doc["out"] = out;
  doc["workers"] = workers;
  return doc;
}

ConfigResult validate_config(const json& raw) {
  ConfigResult result;
  auto& errors = result.errors;
  RunConfig cfg;

  Section top(raw, "", errors,
              {"experiment", "seed", "N", "S", "L", "B", "c", "strategy", "dataset", "trainer",
               "requests", "methods", "fedcio", "retrain_stride", "out", "workers"});
  if (!raw.is_object()) return result;

  top.text("experiment", cfg.experiment);
  top.seed("seed", cfg.seed);
  top.count("N", cfg.N);
  top.count("S", cfg.S);
  top.count("L", cfg.L);
  top.count("B", cfg.B);
  top.count("c", cfg.c);
  top.count("retrain_stride", cfg.retrain_stride);
  top.count("workers", cfg.workers);
  top.text("out", cfg.out);
  if (top.has("strategy")) {
    std::string name;
    top.text("strategy", name);
    try {
      cfg.strategy = parse_strategy(name);
    } catch (const Error& e) {
      errors.push_back(e.what());
    }
  }
  if (top.has("methods")) {
    const json& m = top.raw("methods");
    std::vector<std::string> methods;
    if (!m.is_array() || m.empty()) {
      errors.push_back("'methods' must be a nonempty list");
    } else {
      for (const auto& v : m) {
        const std::string name = v.is_string() ? v.get<std::string>() : "";
        if (name != "FedSGT" && name != "FedCIO" && name != "FedRetrain") {
          errors.push_back("'methods' entries must be FedSGT, FedCIO or FedRetrain");
        } else {
          methods.push_back(name);
        }
      }
      cfg.methods = methods;
    }
  }

  if (top.has("dataset")) {
    const json& d = top.raw("dataset");
    const std::string type = d.is_object() && d.contains("type") && d["type"].is_string()
                                 ? d["type"].get<std::string>()
                                 : "synthetic";
    if (type == "synthetic") {
      Section ds(d, "dataset", errors,
                 {"type", "d", "k", "samples_per_client", "non_iid", "alpha", "separation",
                  "noise", "test_samples"});
      ds.count("d", cfg.dataset.synth.feature_dim);
      ds.count("k", cfg.dataset.synth.label_count);
      ds.count("samples_per_client", cfg.dataset.synth.samples_per_client);
      ds.count("test_samples", cfg.dataset.synth.test_samples);
      ds.flag("non_iid", cfg.dataset.non_iid);
      ds.positive("alpha", cfg.dataset.alpha);
      ds.positive("separation", cfg.dataset.synth.separation, true);
      ds.positive("noise", cfg.dataset.synth.noise, true);
    } else if (type == "csv") {
      cfg.dataset.kind = DatasetSpec::Kind::Csv;
      Section ds(d, "dataset", errors, {"type", "path", "manifest"});
      ds.text("path", cfg.dataset.csv_path);
      ds.text("manifest", cfg.dataset.manifest_path);
      if (cfg.dataset.csv_path.empty()) errors.push_back("'dataset.path' is required for csv");
      if (cfg.dataset.manifest_path.empty()) {
        errors.push_back("'dataset.manifest' is required for csv");
      }
    } else {
      errors.push_back("'dataset.type' must be synthetic or csv");
    }
  }

  if (top.has("trainer")) {
    Section tr(top.raw("trainer"), "trainer", errors,
               {"E", "lr", "batch", "rounds_per_phase", "T", "backbone_scale"});
    tr.count("E", cfg.trainer.epochs, 0);
    tr.positive("lr", cfg.trainer.learning_rate);
    tr.count("batch", cfg.trainer.batch_size);
    tr.count("rounds_per_phase", cfg.trainer.rounds_per_phase);
    tr.count("T", cfg.trainer.baseline_rounds);
    tr.positive("backbone_scale", cfg.trainer.backbone_scale, true);
  }

  if (top.has("requests")) {
    Section rq(top.raw("requests"), "requests", errors, {"count", "seed", "records", "list", "groups"});
    rq.count("count", cfg.requests.count, 0);
    rq.seed("seed", cfg.requests.seed);
    rq.count("records", cfg.requests.records);
    if (rq.has("list")) {
      const json& list = rq.raw("list");
      if (!list.is_array()) errors.push_back("'requests.list' must be a list");
      for (std::size_t i = 0; list.is_array() && i < list.size(); ++i) {
        Section item(list[i], "requests.list[" + std::to_string(i) + "]", errors,
                     {"client", "slice", "records"});
        std::size_t client = 0, slice = 0, records = cfg.requests.records;
        bool ok = item.has("client") && item.has("slice");
        if (!ok) errors.push_back("'requests.list[" + std::to_string(i) + "]' needs client and slice");
        item.count("client", client, 0);
        item.count("slice", slice, 0);
        item.count("records", records);
        if (ok) {
          cfg.requests.list.push_back({SliceRef{ClientId(client), SliceIdx(slice)}, records});
        }
      }
    }
    if (rq.has("groups")) {
      const json& groups = rq.raw("groups");
      if (!groups.is_array()) errors.push_back("'requests.groups' must be a list");
      for (std::size_t i = 0; groups.is_array() && i < groups.size(); ++i) {
        if (!groups[i].is_number_integer() || groups[i].get<long long>() < 0) {
          errors.push_back("'requests.groups' entries must be non-negative integers");
        } else {
          cfg.requests.groups.emplace_back(groups[i].get<std::size_t>());
        }
      }
    }
  }

  if (top.has("fedcio")) {
    Section fc(top.raw("fedcio"), "fedcio", errors, {"retrain"});
    fc.flag("retrain", cfg.fedcio_retrain);
  }

  // Cross-field consistency.
  if (cfg.L > cfg.N * cfg.S) {
    errors.push_back("insufficient slices: L=" + std::to_string(cfg.L) + " groups need at least " +
                     std::to_string(cfg.L) + " slices but N*S=" + std::to_string(cfg.N * cfg.S));
  }
  if (cfg.c > cfg.N) {
    errors.push_back("c=" + std::to_string(cfg.c) + " clusters exceed N=" + std::to_string(cfg.N) +
                     " clients");
  }
  if (cfg.L <= 20) {
    std::uint64_t orders = 1;
    for (std::uint64_t i = 2; i <= cfg.L; ++i) orders *= i;
    if (cfg.B > orders) {
      errors.push_back("B=" + std::to_string(cfg.B) + " exceeds the " + std::to_string(orders) +
                       " distinct orders of L=" + std::to_string(cfg.L) + " groups");
    }
  }
  if (cfg.dataset.kind == DatasetSpec::Kind::Synthetic) {
    const auto& s = cfg.dataset.synth;
    if (s.samples_per_client < cfg.S) {
      errors.push_back("samples_per_client=" + std::to_string(s.samples_per_client) +
                       " cannot fill S=" + std::to_string(cfg.S) + " slices");
    }
    if (s.label_count > s.samples_per_client * cfg.N) {
      errors.push_back("k exceeds the number of training samples");
    }
  }
  for (GroupId g : cfg.requests.groups) {
    if (g.get() >= cfg.L) {
      errors.push_back("requested group " + std::to_string(g.value) + " outside [0, L)");
    }
  }
  cfg.trainer.seed = cfg.seed;
  cfg.trainer.workers = cfg.workers;

  if (errors.empty()) result.config = std::move(cfg);
  return result;
}

ConfigResult load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {std::nullopt, {"cannot open config file " + path}};
  json raw;
  try {
    raw = json::parse(in);
  } catch (const json::parse_error& e) {
    return {std::nullopt, {"config file " + path + ": " + e.what()}};
  }
  return validate_config(raw);
}

Dataset build_dataset(const RunConfig& cfg) {
  if (cfg.dataset.kind == DatasetSpec::Kind::Csv) {
    return load_csv_dataset(cfg.dataset.csv_path, cfg.dataset.manifest_path);
  }
  return synth_dataset(cfg.synth_spec());
}

}  // namespace fedsgt
