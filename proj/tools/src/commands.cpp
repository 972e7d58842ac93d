// Copyright 2026 The fairrobust Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fairrobust_cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace fairrobust::cli {

namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr FairnessKind kAllOps[] = {FairnessKind::cp, FairnessKind::cs, FairnessKind::pe,
                                    FairnessKind::pv};
constexpr PerturbationKind kAllKinds[] = {PerturbationKind::deletion,
                                          PerturbationKind::addition};

std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string percent(double fraction) { return fixed(100.0 * fraction, 1) + "%"; }

const GroupPartition* find_partition(const std::vector<GroupPartition>& parts,
                                     Stakeholder s) {
  for (const auto& p : parts) {
    if (p.stakeholder == s) return &p;
  }
  return nullptr;
}

struct LoadedData {
  Dataset ds;
  SplitDataset split;
  std::vector<GroupPartition> partitions;
};

LoadedData load_data(const RunConfig& cfg) {
  const fs::path dir = data_dir(cfg);
  if (!fs::exists(dir / "dataset.json")) {
    throw DataError("no prepared dataset in " + dir.string() + "; run 'prepare' first");
  }
  LoadedData d;
  d.ds = load_dataset(dir);
  d.split = temporal_split(d.ds, cfg.split);
  d.partitions = load_partitions(dir);
  return d;
}

// Provider-side counterpart of a consumer operationalization and vice versa.
FairnessKind companion(FairnessKind k) {
  switch (k) {
    case FairnessKind::cp:
      return FairnessKind::pe;
    case FairnessKind::cs:
      return FairnessKind::pv;
    case FairnessKind::pe:
      return FairnessKind::cp;
    case FairnessKind::pv:
      return FairnessKind::cs;
  }
  return FairnessKind::cp;
}

void check_split_matches(const RunConfig& cfg) {
  const fs::path path = model_dir(cfg) / "train_report.json";
  if (!fs::exists(path)) throw DataError("missing " + path.string() + "; run 'train' first");
  const auto j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.contains("split")) throw DataError("malformed " + path.string());
  const auto& s = j.at("split");
  const SplitRatios stored{s.value("train", 0u), s.value("validation", 0u), s.value("test", 0u)};
  if (!(stored == cfg.split)) {
    throw ConfigError("config/checkpoint mismatch: model was trained with split " +
                      std::to_string(stored.train) + "/" + std::to_string(stored.validation) +
                      "/" + std::to_string(stored.test));
  }
}

// Partitions seen by one run: the consumer side follows the run's attribute,
// which may differ from the one used at prepare time.
std::vector<GroupPartition> run_partitions(const Dataset& ds,
                                           const std::vector<GroupPartition>& saved,
                                           const std::string& consumer_attribute) {
  std::vector<GroupPartition> out;
  try {
    out.push_back(partition_consumers(ds, consumer_attribute));
  } catch (const DataError&) {
    // No usable attribute: provider-side runs only.
  }
  if (const auto* p = find_partition(saved, Stakeholder::provider)) out.push_back(*p);
  return out;
}

// Which group of each available partition the original system favors.
struct Attribution {
  std::optional<int> consumer;
  std::optional<int> provider;
};

std::string attribution_json(const Attribution& a, const std::vector<GroupPartition>& parts,
                             const std::string& consumer_attribute) {
  ojson j;
  j["schema_version"] = kReportSchemaVersion;
  j["groups"] = ojson::array();
  if (a.consumer) {
    const auto* p = find_partition(parts, Stakeholder::consumer);
    j["groups"].push_back(ojson{{"stakeholder", "consumer"},
                                {"attribute", consumer_attribute},
                                {"advantaged", p->label(*a.consumer)}});
  }
  if (a.provider) {
    const auto* p = find_partition(parts, Stakeholder::provider);
    j["groups"].push_back(
        ojson{{"stakeholder", "provider"}, {"advantaged", p->label(*a.provider)}});
  }
  return j.dump(2) + "\n";
}

Attribution attribution_from_json(const std::string& text,
                                  const std::vector<GroupPartition>& parts) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.contains("groups")) throw DataError("malformed attribution.json");
  Attribution a;
  for (const auto& g : j.at("groups")) {
    const std::string who = g.value("stakeholder", "");
    const std::string label = g.value("advantaged", "");
    const Stakeholder s = who == "consumer" ? Stakeholder::consumer : Stakeholder::provider;
    const auto* p = find_partition(parts, s);
    if (p == nullptr) throw DataError("attribution.json names a missing " + who + " partition");
    int idx = -1;
    if (label == p->label_1) idx = 0;
    if (label == p->label_2) idx = 1;
    if (idx < 0) throw DataError("attribution.json: unknown group label '" + label + "'");
    (s == Stakeholder::consumer ? a.consumer : a.provider) = idx;
  }
  return a;
}

std::vector<EdgeImpact> impacts_for(const std::vector<std::pair<Index, Index>>& edges,
                                    const std::vector<GroupPartition>& parts,
                                    const Attribution& a) {
  std::vector<EdgeImpact> out;
  if (edges.empty()) return out;
  if (a.consumer) {
    out.push_back(edge_impact(edges, *find_partition(parts, Stakeholder::consumer), *a.consumer));
  }
  if (a.provider) {
    out.push_back(edge_impact(edges, *find_partition(parts, Stakeholder::provider), *a.provider));
  }
  return out;
}

void print_report(std::ostream& log, const std::string& name, const RobustnessReport& r) {
  log << name << ": DP " << fixed(r.metric_original, 6) << " -> " << fixed(r.metric_best, 6)
      << ", delta " << fixed(r.delta, 6) << " ("
      << (r.relative.undefined ? std::string("n/a") : percent(r.relative.value)) << ")";
  if (r.effective) {
    log << ", " << r.n_perturbed_best << " of " << r.num_candidates << " edges ("
        << percent(static_cast<double>(r.n_perturbed_best) /
                   static_cast<double>(r.num_candidates))
        << ") at epoch " << *r.best_epoch;
  } else {
    log << ", no effective perturbation found";
  }
  if (r.robust) log << ", " << (*r.robust ? "robust" : "not robust");
  log << "\n";
}

}  // namespace

fs::path data_dir(const RunConfig& cfg) { return cfg.out / "data"; }
fs::path model_dir(const RunConfig& cfg) { return cfg.out / "model"; }
fs::path runs_dir(const RunConfig& cfg) { return cfg.out / "runs"; }
fs::path run_dir(const RunConfig& cfg) {
  return runs_dir(cfg) / run_name(cfg.attack.operationalization, cfg.attack.kind);
}

std::string run_name(FairnessKind op, PerturbationKind kind) {
  return std::string(to_string(op)) + "_" + to_string(kind);
}

double random_ranking_ndcg(std::size_t n_relevant, std::size_t n_candidates, std::size_t k) {
  if (n_relevant == 0 || n_candidates == 0 || k == 0) return 0.0;
  const double hit = static_cast<double>(std::min(n_relevant, n_candidates)) /
                     static_cast<double>(n_candidates);
  double dcg = 0.0;
  for (std::size_t p = 0; p < std::min(k, n_candidates); ++p) {
    dcg += hit / std::log2(static_cast<double>(p) + 2.0);
  }
  double ideal = 0.0;
  for (std::size_t p = 0; p < std::min(n_relevant, k); ++p) {
    ideal += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  }
  return dcg / ideal;
}

PrepareSummary cmd_prepare(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const bool consumer_op =
      stakeholder_of(cfg.attack.operationalization) == Stakeholder::consumer;
  Dataset ds;
  if (cfg.data.synthetic) {
    ds = synth_generate(cfg.seed, cfg.data.synth);
  } else {
    if (consumer_op && !cfg.data.attributes) {
      throw DataError(std::string("operationalization '") +
                      to_string(cfg.attack.operationalization) +
                      "' needs user attributes; set data.attributes");
    }
    ds = load_interactions(cfg.data.interactions, cfg.data.columns);
    if (cfg.data.attributes) {
      load_user_attributes(ds, *cfg.data.attributes, cfg.data.attributes_delimiter);
    }
  }
  for (const auto& cut : cfg.data.cuts) {
    binarize_attribute(ds, cut.attribute, cut.threshold, cut.label_at_least, cut.label_below);
  }
  if (cfg.data.min_interactions > 0) ds = filter_min_interactions(ds, cfg.data.min_interactions);

  std::vector<GroupPartition> partitions;
  try {
    partitions.push_back(partition_consumers(ds, cfg.attack.consumer_attribute));
  } catch (const DataError& e) {
    if (consumer_op) throw;
    log << "note: no consumer partition (" << e.what() << ")\n";
  }
  partitions.push_back(partition_providers_by_popularity(temporal_split(ds, cfg.split)));

  fs::create_directories(cfg.out);
  save_dataset(data_dir(cfg), ds, partitions);
  write_file(cfg.out / "config.txt", to_text(cfg));

  PrepareSummary s{ds.num_users(), ds.num_items(), ds.interactions.size(), partitions};
  log << "prepared " << s.users << " users, " << s.items << " items, " << s.interactions
      << " interactions in " << data_dir(cfg).string() << "\n";
  for (const auto& p : partitions) {
    const double n = static_cast<double>(p.size());
    log << "  " << (p.stakeholder == Stakeholder::consumer ? "consumers" : "providers")
        << ": " << p.label_1 << " " << percent(p.members_1.size() / n) << ", " << p.label_2
        << " " << percent(p.members_2.size() / n) << "\n";
  }
  return s;
}

TrainSummary cmd_train(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const LoadedData d = load_data(cfg);
  if (!d.split.flagged_users.empty()) {
    log << "note: " << d.split.flagged_users.size()
        << " users have an empty validation or test part\n";
  }
  const RecModelConfig mc = model_config(cfg);
  const TrainResult tr = bpr_train(d.split, mc);
  save_checkpoint(model_dir(cfg), tr.params, mc);

  const LightGcn model(tr.params, mc.layers);
  const AdjacencyMatrix adjacency =
      build_adjacency(d.split.train, d.split.num_users, d.split.num_items);
  std::vector<Index> users(d.split.num_users);
  for (Index u = 0; u < users.size(); ++u) users[u] = u;
  const auto exclude = items_by_user(d.split.train, d.split.num_users);
  const auto lists = recommend_topk(model.scores(adjacency, users), users, mc.k_eval, exclude);
  const auto validation = items_by_user(d.split.validation, d.split.num_users);
  const auto test = items_by_user(d.split.test, d.split.num_users);

  TrainSummary s;
  s.best_epoch = tr.report.best_epoch;
  s.epochs_run = tr.report.epoch_loss.size();
  s.validation = {mean_ndcg(lists, validation), mean_precision(lists, validation)};
  s.test = {mean_ndcg(lists, test), mean_precision(lists, test)};
  double total = 0.0;
  std::size_t counted = 0;
  for (Index u = 0; u < users.size(); ++u) {
    if (test[u].empty()) continue;
    total += random_ranking_ndcg(test[u].size(), d.split.num_items - exclude[u].size(), mc.k_eval);
    ++counted;
  }
  s.random_ndcg = counted ? total / static_cast<double>(counted) : 0.0;

  const std::string k = std::to_string(mc.k_eval);
  ojson j;
  j["schema_version"] = kReportSchemaVersion;
  j["split"] = ojson{{"train", cfg.split.train},
                     {"validation", cfg.split.validation},
                     {"test", cfg.split.test}};
  j["seed"] = mc.seed;
  j["k"] = mc.k_eval;
  j["best_epoch"] = s.best_epoch;
  j["epochs_run"] = s.epochs_run;
  j["validation"] = ojson{{"N@" + k, s.validation.ndcg}, {"P@" + k, s.validation.precision}};
  j["test"] = ojson{{"N@" + k, s.test.ndcg}, {"P@" + k, s.test.precision}};
  j["random_test_ndcg"] = s.random_ndcg;
  j["epoch_loss"] = tr.report.epoch_loss;
  j["validation_ndcg"] = tr.report.validation_ndcg;
  write_file(model_dir(cfg) / "train_report.json", j.dump(2) + "\n");

  log << "trained " << s.epochs_run << " epochs, best " << s.best_epoch << "; validation N@" << k
      << " " << fixed(s.validation.ndcg, 4) << " P@" << k << " " << fixed(s.validation.precision, 4)
      << "; test N@" << k << " " << fixed(s.test.ndcg, 4) << " P@" << k << " "
      << fixed(s.test.precision, 4) << " (random N@" << k << " " << fixed(s.random_ndcg, 4)
      << ")\n";
  return s;
}

AttackSummary cmd_attack(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const LoadedData d = load_data(cfg);
  const Checkpoint ckpt = load_checkpoint(model_dir(cfg));
  if (ckpt.params.num_users() != d.split.num_users ||
      ckpt.params.num_items() != d.split.num_items) {
    throw ConfigError("config/checkpoint mismatch: checkpoint covers " +
                      std::to_string(ckpt.params.num_users()) + " users x " +
                      std::to_string(ckpt.params.num_items()) + " items, dataset has " +
                      std::to_string(d.split.num_users) + " x " +
                      std::to_string(d.split.num_items));
  }
  if (ckpt.config.dim != cfg.model.dim || ckpt.config.layers != cfg.model.layers) {
    throw ConfigError("config/checkpoint mismatch: checkpoint has model.dim = " +
                      std::to_string(ckpt.config.dim) + ", model.layers = " +
                      std::to_string(ckpt.config.layers));
  }
  check_split_matches(cfg);

  const LightGcn model(ckpt.params, ckpt.config.layers);
  const AttackConfig acfg = attack_config(cfg);
  const AttackSetup setup = run_attack(d.split, d.ds, model, acfg);
  const FairnessAttackProblem& problem = *setup.problem;
  const AttackResult& result = setup.result;
  const auto partitions = run_partitions(d.ds, d.partitions, acfg.consumer_attribute);

  std::optional<MetricReport> best_metric;
  if (result.best) best_metric = problem.exact_report(result.best_mask);
  const auto edges = perturbed_edge_list(result, problem.candidates());

  // Advantaged groups of the original system, for both stakeholders.
  Attribution attribution;
  const Stakeholder own = stakeholder_of(acfg.operationalization);
  (own == Stakeholder::consumer ? attribution.consumer : attribution.provider) =
      problem.original_report().advantaged();
  const Stakeholder other =
      own == Stakeholder::consumer ? Stakeholder::provider : Stakeholder::consumer;
  if (const auto* part = find_partition(partitions, other)) {
    std::vector<Index> users(d.split.num_users);
    for (Index u = 0; u < users.size(); ++u) users[u] = u;
    const auto ctx = make_evaluation_context(d.split);
    const auto lists =
        recommend_topk(model.scores(problem.adjacency(), users), users, acfg.k_eval, ctx.exclude);
    const auto op = make_operationalization(companion(acfg.operationalization),
                                            d.split.num_items, acfg.k_eval, acfg.tau);
    (other == Stakeholder::consumer ? attribution.consumer : attribution.provider) =
        group_metric(op, lists, ctx, *part).advantaged();
  }

  AttackSummary s;
  s.run_dir = run_dir(cfg);
  fs::create_directories(s.run_dir);
  write_file(s.run_dir / "run_config.txt", to_text(cfg));
  write_file(s.run_dir / "config.json", config_json(acfg));
  write_file(s.run_dir / "iterations.csv", iterations_csv(result));
  write_file(s.run_dir / "timing.csv", timing_csv(result));
  write_file(s.run_dir / "result.json",
             result_json(result, acfg, problem.num_candidates(), problem.original_report(),
                         best_metric ? &*best_metric : nullptr));
  write_file(s.run_dir / "perturbed_edges.txt", perturbed_edges_text(edges, acfg.kind));
  write_file(s.run_dir / "attribution.json",
             attribution_json(attribution, partitions, acfg.consumer_attribute));

  s.report = build_report(result, acfg, problem.num_candidates());
  s.impacts = impacts_for(edges, partitions, attribution);
  emit_report(s.run_dir, s.report, s.impacts);
  print_report(log, run_name(acfg.operationalization, acfg.kind), s.report);
  return s;
}

std::vector<SweepEntry> cmd_sweep(const RunConfig& cfg, std::size_t jobs, std::ostream& log) {
  validate(cfg);
  std::vector<SweepEntry> entries;
  for (auto op : kAllOps) {
    for (auto kind : kAllKinds) entries.push_back({op, kind, std::nullopt, ""});
  }
  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < entries.size(); t = next++) {
      SweepEntry& e = entries[t];
      RunConfig run = cfg;
      run.attack.operationalization = e.op;
      run.attack.kind = e.kind;
      std::ostringstream run_log;
      try {
        e.summary = cmd_attack(run, run_log);
      } catch (const std::exception& ex) {
        e.error = ex.what();
        run_log << run_name(e.op, e.kind) << ": failed: " << e.error << "\n";
      }
      const std::lock_guard<std::mutex> lock(log_mutex);
      log << run_log.str() << std::flush;
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(jobs, 1, entries.size());
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }
  return entries;
}

std::vector<AttackSummary> cmd_report(const RunConfig& cfg, std::ostream& log) {
  const fs::path root = runs_dir(cfg);
  if (!fs::is_directory(root)) throw DataError("no runs in " + root.string());
  const Dataset ds = load_dataset(data_dir(cfg));
  const auto saved = load_partitions(data_dir(cfg));
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "result.json")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw DataError("no runs in " + root.string());

  std::vector<AttackSummary> out;
  for (const auto& dir : dirs) {
    const AttackConfig acfg = attack_config_from_json(read_file(dir / "config.json"));
    const std::string result_text = read_file(dir / "result.json");
    const auto result_doc = nlohmann::json::parse(result_text, nullptr, false);
    if (result_doc.is_discarded()) throw DataError("malformed " + (dir / "result.json").string());
    AttackResult result;
    result.logs = iterations_from_csv(read_file(dir / "iterations.csv"));
    result.original_dp = result_doc.at("original").at("DP").get<double>();
    result.best = best_iteration(result.logs, acfg.gamma);
    const auto edges = perturbed_edges_from_text(read_file(dir / "perturbed_edges.txt"));
    const auto partitions = run_partitions(ds, saved, acfg.consumer_attribute);
    const Attribution attribution =
        attribution_from_json(read_file(dir / "attribution.json"), partitions);

    AttackSummary s;
    s.run_dir = dir;
    s.report = build_report(result, acfg, num_candidates_from_result_json(result_text));
    s.impacts = impacts_for(edges, partitions, attribution);
    emit_report(dir, s.report, s.impacts);
    print_report(log, dir.filename().string(), s.report);
    for (const auto& e : s.impacts) {
      log << "    EI " << (e.stakeholder == Stakeholder::consumer ? "consumer" : "provider")
          << ": " << e.label_advantaged << " (adv) " << fixed(e.ei_advantaged, 3) << ", "
          << e.label_disadvantaged << " " << fixed(e.ei_disadvantaged, 3) << ", delta EI "
          << fixed(e.delta_ei, 3) << "\n";
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace fairrobust::cli
