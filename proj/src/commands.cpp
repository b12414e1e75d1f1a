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

#include "fedsgt/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include "fedsgt/bank_io.hpp"
#include "fedsgt/report.hpp"

namespace fedsgt::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using analytics::Method;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

ordered_json manifest(const std::string& command, ordered_json config, ordered_json seeds,
                      const std::vector<std::pair<std::string, std::string>>& outputs) {
  ordered_json doc;
  doc["tool"] = "fedsgt";
  doc["version"] = kToolVersion;
  doc["command"] = command;
  doc["config"] = std::move(config);
  doc["seeds"] = std::move(seeds);
  ordered_json files = ordered_json::object();
  for (const auto& [name, path] : outputs) {
    files[name] = "fnv1a64:" + hex64(fnv1a64(report::read_text(path)));
  }
  doc["outputs"] = std::move(files);
  return doc;
}

ordered_json run_seeds(const RunConfig& cfg) {
  return {{"run", cfg.seed},      {"dataset", cfg.seed},
          {"grouping", cfg.seed}, {"sequences", cfg.seed},
          {"trainer", cfg.trainer.seed}, {"requests", cfg.requests.seed}};
}

ordered_json manifest(const std::string& command, const RunConfig& cfg,
                      const std::vector<std::pair<std::string, std::string>>& outputs) {
  return manifest(command, cfg.to_json(), run_seeds(cfg), outputs);
}

template <typename Fn>
int guarded(std::ostream& log, Fn&& body) {
  try {
    return body();
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const nlohmann::json::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitCorrupt;
  }
}

GroupingPlan plan_for(const RunConfig& cfg, const Dataset& data) {
  return build_grouping(data.catalog(), cfg.L, cfg.seed);
}

ordered_json removed_json(const std::map<SliceRef, std::size_t>& removed) {
  ordered_json list = ordered_json::array();
  for (const auto& [slice, count] : removed) {
    list.push_back({{"client", slice.client.value}, {"slice", slice.slice.value}, {"records", count}});
  }
  return list;
}

}  // namespace

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Domain:
    case ErrorKind::Config:
    case ErrorKind::Lookup:
    case ErrorKind::Io:
      return kExitConfig;
    case ErrorKind::Corrupt: return kExitCorrupt;
    case ErrorKind::Training: return kExitTraining;
  }
  return kExitConfig;
}

std::vector<UnlearnRequest> resolve_requests(const RequestSpec& spec, const GroupingPlan& plan) {
  if (!spec.groups.empty()) return group_requests(plan, spec.groups, spec.records);
  if (!spec.list.empty()) return spec.list;
  return uniform_requests(plan, spec.count, spec.seed, spec.records);
}

// ---------------------------------------------------------------- analyze

AnalyzeReport analyze(const AnalyzeOptions& opts) {
  const auto& p = opts.params;
  if (p.L == 0 || p.B == 0 || p.c == 0 || p.S == 0 || p.T == 0 || p.E == 0 || p.P == 0 ||
      p.N == 0) {
    throw config_error("analyze: L, B, c, S, N, T, E and P must all be >= 1");
  }
  AnalyzeReport rep;
  rep.delta_fedsgt = analytics::deletion_rate_fedsgt(p.L, p.B);
  rep.delta_fedcio = analytics::deletion_rate_fedcio(p.c);
  rep.delta_ratio = rep.delta_fedsgt / rep.delta_fedcio;
  rep.matched_budget = analytics::matched_budget(p.T, p.L);
  const double comm_all_rotations = analytics::expected_comm_cost(p.L, p.S);
  rep.comm_fedsgt = comm_all_rotations * static_cast<double>(p.B) / static_cast<double>(p.L);
  rep.comm_fedcio = analytics::comm_rounds_fedcio(p.T, opts.t_cluster);
  rep.comm_fedavg = analytics::comm_rounds_fedavg(p.T);

  const bool closed_form_sgt = p.B >= p.L;
  ordered_json curve = ordered_json::array();
  for (std::uint64_t r = 0; r <= opts.r_max; ++r) {
    const auto sgt = analytics::expected_remaining_fedsgt(p.D, p.L, p.B, r);
    const double cio = analytics::expected_remaining_fedcio(p.D, p.c, r);
    rep.remaining_fedsgt.push_back(sgt.value_or(std::nan("")));
    rep.remaining_fedcio.push_back(cio);
    curve.push_back({{"r", r},
                     {"fedsgt", sgt ? ordered_json(*sgt) : ordered_json()},
                     {"fedcio", cio}});
  }

  auto& j = rep.json;
  j["params"] = {{"L", p.L}, {"B", p.B}, {"B_prime", p.budget_prime()}, {"c", p.c}, {"D", p.D},
                 {"S", p.S}, {"N", p.N},  {"T", p.T}, {"E", p.E}, {"P", p.P},
                 {"T_cluster", opts.t_cluster}};
  j["deletion_rate"] = {{"FedSGT", rep.delta_fedsgt},
                        {"FedCIO", rep.delta_fedcio},
                        {"ratio", rep.delta_ratio}};
  j["matched_budget"] = rep.matched_budget;
  j["comm_rounds_per_client"] = {{"FedAvg", rep.comm_fedavg},
                                 {"FedCIO", rep.comm_fedcio},
                                 {"FedSGT", rep.comm_fedsgt},
                                 {"FedSGT_all_rotations", comm_all_rotations}};
  const double cost_avg = analytics::training_cost(Method::FedAvg, p);
  j["training_cost"] = {{"FedAvg", cost_avg},
                        {"FedCIO", analytics::training_cost(Method::FedCIO, p)},
                        {"FedSGT", analytics::training_cost(Method::FedSGT, p)},
                        {"FedSGT_over_FedAvg", analytics::training_cost(Method::FedSGT, p) / cost_avg}};
  j["remaining_closed_form_available"] = closed_form_sgt;
  j["remaining_curve"] = std::move(curve);
  return rep;
}

int cmd_analyze(const AnalyzeOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    const AnalyzeReport rep = analyze(opts);
    const auto& p = opts.params;
    ensure_dir(opts.out);

    {
      report::CsvWriter csv(join(opts.out, "deletion_rates.csv"), {"method", "params", "delta"});
      csv.row({"FedSGT", "L=" + std::to_string(p.L) + " B=" + std::to_string(p.B),
               report::number(rep.delta_fedsgt)});
      csv.row({"FedCIO", "c=" + std::to_string(p.c), report::number(rep.delta_fedcio)});
    }
    {
      report::CsvWriter csv(join(opts.out, "remaining_curve.csv"), {"r", "fedsgt", "fedcio"});
      for (std::size_t r = 0; r < rep.remaining_fedcio.size(); ++r) {
        const double sgt = rep.remaining_fedsgt[r];
        csv.row({std::to_string(r), std::isnan(sgt) ? "" : report::number(sgt),
                 report::number(rep.remaining_fedcio[r])});
      }
    }
    {
      report::CsvWriter csv(join(opts.out, "comm_cost.csv"), {"method", "rounds_per_client"});
      csv.row({"FedAvg", report::number(rep.comm_fedavg)});
      csv.row({"FedCIO", report::number(rep.comm_fedcio)});
      csv.row({"FedSGT", report::number(rep.comm_fedsgt)});
    }
    {
      report::CsvWriter csv(join(opts.out, "training_cost.csv"), {"method", "cost", "ratio_to_fedavg"});
      const double base = analytics::training_cost(Method::FedAvg, p);
      for (Method m : {Method::FedAvg, Method::FedCIO, Method::FedSGT}) {
        const double cost = analytics::training_cost(m, p);
        csv.row({analytics::to_string(m), report::number(cost), report::number(cost / base)});
      }
    }
    report::write_json(join(opts.out, "analyze.json"), rep.json);
    std::vector<std::pair<std::string, std::string>> outputs;
    for (const char* f : {"deletion_rates.csv", "remaining_curve.csv", "comm_cost.csv",
                          "training_cost.csv", "analyze.json"}) {
      outputs.emplace_back(f, join(opts.out, f));
    }
    ordered_json config = rep.json["params"];
    config["r_max"] = opts.r_max;
    report::write_json(join(opts.out, "analyze_manifest.json"),
                       manifest("analyze", config, ordered_json::object(), outputs));

    log << std::fixed << std::setprecision(4);
    log << "delta(FedSGT) L=" << p.L << " B=" << p.B << ": " << rep.delta_fedsgt << "\n";
    log << "delta(FedCIO) c=" << p.c << ": " << rep.delta_fedcio << "\n";
    log << "ratio: " << rep.delta_ratio << "\n";
    log << "matched budget 2TL/(L+1): " << rep.matched_budget << "\n";
    log << "rounds per client: FedSGT " << rep.comm_fedsgt << ", FedCIO " << rep.comm_fedcio
        << ", FedAvg " << rep.comm_fedavg << "\n";
    log.unsetf(std::ios::fixed);
    return kExitOk;
  });
}

// --------------------------------------------------------------- validate

int cmd_validate(const ValidateOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    const auto start = std::chrono::steady_clock::now();
    const auto rows = montecarlo::run_validation(opts.grid, opts.mc, opts.filter);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ensure_dir(opts.out);
    report::CsvWriter csv(join(opts.out, "validate.csv"),
                          {"quantity", "params", "closed_form", "mc_mean", "mc_stderr", "zscore"});
    ordered_json list = ordered_json::array();
    std::size_t failures = 0;
    double worst = 0.0;
    for (const auto& r : rows) {
      csv.row({r.quantity, r.params, report::number(r.closed_form), report::number(r.mc.mean),
               report::number(r.mc.std_error), report::number(r.zscore)});
      list.push_back({{"quantity", r.quantity},
                      {"params", r.params},
                      {"closed_form", r.closed_form},
                      {"mc_mean", r.mc.mean},
                      {"mc_stderr", r.mc.std_error},
                      {"zscore", std::isfinite(r.zscore) ? ordered_json(r.zscore)
                                                         : ordered_json(report::number(r.zscore))},
                      {"pass", r.pass}});
      if (!r.pass) {
        ++failures;
        log << "FAIL " << r.quantity << " [" << r.params << "] closed=" << r.closed_form
            << " mc=" << r.mc.mean << " z=" << r.zscore << "\n";
      }
      if (std::abs(r.zscore) > worst) worst = std::abs(r.zscore);
    }
    ordered_json doc;
    doc["trials"] = opts.mc.trials;
    doc["seed"] = opts.mc.seed;
    doc["confidence_k"] = opts.mc.confidence_k;
    doc["quantities"] = rows.size();
    doc["failures"] = failures;
    doc["max_abs_z"] = worst;
    doc["seconds"] = seconds;
    doc["rows"] = std::move(list);
    report::write_json(join(opts.out, "validate.json"), doc);
    ordered_json config;
    config["trials"] = opts.mc.trials;
    config["confidence_k"] = opts.mc.confidence_k;
    config["workers"] = opts.mc.workers;
    config["grid"] = {{"L", opts.grid.L}, {"c", opts.grid.c}, {"r", opts.grid.r},
                      {"S", opts.grid.S}, {"D", opts.grid.D}, {"B", opts.grid.B}};
    report::write_json(join(opts.out, "validate_manifest.json"),
                       manifest("validate", config, {{"mc", opts.mc.seed}},
                                {{"validate.csv", join(opts.out, "validate.csv")},
                                 {"validate.json", join(opts.out, "validate.json")}}));
    log << rows.size() << " quantities, " << failures << " outside " << opts.mc.confidence_k
        << " standard errors, max |z| = " << worst << " (" << seconds << " s)\n";
    return failures ? kExitValidation : kExitOk;
  });
}

// ------------------------------------------------------------------ train

TrainOutcome run_training(const RunConfig& cfg) {
  TrainOutcome t;
  t.data = build_dataset(cfg);
  t.plan = plan_for(cfg, t.data);
  t.seqs = build_sequences(cfg.L, cfg.B, cfg.seed);
  BankTraining run = train_bank(t.data, t.plan, t.seqs, cfg.trainer);
  t.bank = std::move(run.bank);
  t.stats = std::move(run.stats);
  for (std::size_t s = 0; s < t.seqs.size(); ++s) {
    Ensemble e;
    e.weights.push_back(t.bank.composite(SequenceId(s), cfg.L));
    e.mix.push_back(1.0);
    t.sequence_accuracy.push_back(evaluate(e, t.data.test).value_or(0.0));
  }
  return t;
}

int cmd_train(const RunConfig& cfg, std::ostream& log) {
  return guarded(log, [&] {
    const TrainOutcome t = run_training(cfg);
    ensure_dir(cfg.out);
    const std::string bank_path = join(cfg.out, "bank.fsgt");
    const std::string plan_path = join(cfg.out, "plan.json");
    const std::string report_path = join(cfg.out, "train_report.csv");
    write_bank(bank_path, t.bank);
    report::write_text(plan_path, t.plan.to_json());
    {
      report::CsvWriter csv(report_path, {"sequence", "order", "accuracy", "samples_last_phase"});
      for (std::size_t s = 0; s < t.seqs.size(); ++s) {
        std::string order;
        for (GroupId g : t.seqs.perms()[s]) order += (order.empty() ? "" : " ") + std::to_string(g.value);
        csv.row({std::to_string(s), order, report::number(t.sequence_accuracy[s]),
                 std::to_string(t.bank.modules[s].back().samples)});
      }
    }
    ordered_json stats;
    stats["parameter_updates"] = t.stats.parameter_updates;
    stats["rounds"] = t.stats.rounds;
    stats["client_rounds"] = t.stats.client_rounds;
    report::write_json(join(cfg.out, "train_stats.json"), stats);
    report::write_json(join(cfg.out, "manifest.json"),
                       manifest("train", cfg,
                                {{"bank.fsgt", bank_path}, {"plan.json", plan_path},
                                 {"train_report.csv", report_path}}));
    double mean = 0.0;
    for (double a : t.sequence_accuracy) mean += a;
    mean /= static_cast<double>(t.sequence_accuracy.size());
    log << "trained " << t.seqs.size() << " sequences x " << cfg.L << " phases, mean accuracy "
        << mean << ", " << t.stats.parameter_updates << " parameter updates -> " << bank_path
        << "\n";
    return kExitOk;
  });
}

// ---------------------------------------------------------------- unlearn

int cmd_unlearn(const UnlearnOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    const fs::path bank_dir = fs::path(opts.bank_path).parent_path();
    const std::string manifest_path =
        opts.manifest_path.empty() ? (bank_dir / "manifest.json").string() : opts.manifest_path;
    const auto doc = nlohmann::json::parse(report::read_text(manifest_path));
    ConfigResult parsed = validate_config(doc.at("config"));
    if (!parsed.ok()) {
      for (const auto& e : parsed.errors) log << "manifest config: " << e << "\n";
      return static_cast<int>(kExitCorrupt);
    }
    RunConfig cfg = *parsed.config;
    if (opts.strategy) cfg.strategy = *opts.strategy;
    if (opts.requests) cfg.requests = *opts.requests;

    ModuleBank bank = read_bank(opts.bank_path);
    Dataset data = build_dataset(cfg);
    GroupingPlan plan = plan_for(cfg, data);
    const fs::path plan_path = bank_dir / "plan.json";
    if (fs::exists(plan_path) && report::read_text(plan_path.string()) != plan.to_json()) {
      throw corrupt_error("plan.json does not match the plan rebuilt from the manifest");
    }
    SequenceSet seqs = build_sequences(cfg.L, cfg.B, cfg.seed);
    if (bank.sequences().perms() != seqs.perms()) {
      throw corrupt_error("module bank sequence orders do not match the manifest");
    }

    FedSgtSystem system(std::move(data), std::move(plan), std::move(seqs), std::move(bank),
                        cfg.strategy, cfg.trainer);
    if (opts.resume) {
      const auto state_doc = nlohmann::json::parse(report::read_text(*opts.resume));
      std::map<SliceRef, std::size_t> removed;
      for (const auto& r : state_doc.at("removed")) {
        removed[SliceRef{ClientId(r.at("client").get<std::uint32_t>()),
                         SliceIdx(r.at("slice").get<std::uint32_t>())}] =
            r.at("records").get<std::size_t>();
      }
      system.restore_state(SequenceState::from_json(state_doc.at("sequence_state").dump()), removed);
    }

    const auto requests = resolve_requests(cfg.requests, system.plan());
    const Timeline timeline = run_stream(system, requests);
    std::optional<AuditReport> audit;
    if (opts.audit) audit = system.audit();

    ensure_dir(opts.out);
    report::write_timeline_csv(join(opts.out, "timeline.csv"), timeline);
    ordered_json summary = report::timeline_summary(timeline, audit);
    summary["strategy"] = to_string(cfg.strategy);
    summary["requests"] = requests.size();
    summary["timeline"] = report::timeline_json(timeline);
    report::write_json(join(opts.out, "timeline.json"), summary);

    ordered_json state;
    state["format"] = "fedsgt-checkpoint";
    state["sequence_state"] = ordered_json::parse(system.state().to_json());
    state["removed"] = removed_json(system.removed_records());
    report::write_json(join(opts.out, "state.json"), state);
    ordered_json config = cfg.to_json();
    config["bank"] = opts.bank_path;
    config["audit"] = opts.audit;
    if (opts.resume) config["resume"] = *opts.resume;
    report::write_json(join(opts.out, "unlearn_manifest.json"),
                       manifest("unlearn", config, run_seeds(cfg),
                                {{"bank", opts.bank_path},
                                 {"timeline.csv", join(opts.out, "timeline.csv")},
                                 {"timeline.json", join(opts.out, "timeline.json")},
                                 {"state.json", join(opts.out, "state.json")}}));

    const auto fail = failure_step(timeline);
    log << requests.size() << " requests, " << system.state().surviving() << " of "
        << system.sequences().size() << " sequences alive";
    if (fail) log << ", service failed at step " << *fail;
    log << "\n";
    if (audit) {
      log << "exactness audit: " << (audit->pass ? "pass" : "FAIL") << " (" << audit->message << ")\n";
      if (!audit->pass) return static_cast<int>(kExitValidation);
    }
    return static_cast<int>(kExitOk);
  });
}

// ---------------------------------------------------------------- compare

int cmd_compare(const RunConfig& cfg, std::ostream& log) {
  return guarded(log, [&] {
    auto wants = [&](const std::string& m) {
      return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
    };
    Dataset data = build_dataset(cfg);
    GroupingPlan plan = plan_for(cfg, data);
    const auto requests = resolve_requests(cfg.requests, plan);

    std::vector<Timeline> timelines;
    if (wants("FedSGT")) {
      SequenceSet seqs = build_sequences(cfg.L, cfg.B, cfg.seed);
      BankTraining run = train_bank(data, plan, seqs, cfg.trainer);
      FedSgtSystem system(data, plan, std::move(seqs), std::move(run.bank), cfg.strategy,
                          cfg.trainer);
      timelines.push_back(run_stream(system, requests));
    }
    if (wants("FedCIO")) {
      FedCioOptions o;
      o.clusters = cfg.c;
      o.retrain = cfg.fedcio_retrain;
      timelines.push_back(fedcio_simulate(data, cfg.trainer, o, cfg.L, requests));
    }
    if (wants("FedRetrain")) {
      timelines.push_back(fedretrain_simulate(data, cfg.trainer, cfg.L, requests, cfg.retrain_stride));
    }

    Timeline merged;
    for (const auto& t : timelines) merged.insert(merged.end(), t.begin(), t.end());
    std::stable_sort(merged.begin(), merged.end(),
                     [](const TimelineRecord& a, const TimelineRecord& b) { return a.step < b.step; });

    ensure_dir(cfg.out);
    report::write_timeline_csv(join(cfg.out, "compare_timeline.csv"), merged);
    ordered_json summary;
    summary["requests"] = requests.size();
    ordered_json methods = ordered_json::object();
    for (const auto& t : timelines) {
      methods[t.front().method] = report::timeline_summary(t, std::nullopt);
      log << t.front().method << ": failure step ";
      if (auto f = failure_step(t)) {
        log << *f;
      } else {
        log << "none";
      }
      if (auto m = mean_utility(t)) log << ", mean utility " << *m;
      log << "\n";
    }
    summary["methods"] = std::move(methods);
    report::write_json(join(cfg.out, "compare_summary.json"), summary);
    report::write_json(join(cfg.out, "compare_manifest.json"),
                       manifest("compare", cfg, {{"compare_timeline.csv", join(cfg.out, "compare_timeline.csv")}}));
    return static_cast<int>(kExitOk);
  });
}

}  // namespace fedsgt::cli
