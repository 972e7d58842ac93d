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

#include "fairrobust/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fairrobust {

namespace {

using ojson = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
ojson optional_json(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

template <typename T>
std::optional<T> optional_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

const char* stakeholder_name(Stakeholder s) {
  return s == Stakeholder::consumer ? "consumer" : "provider";
}

Stakeholder stakeholder_from(const std::string& s) {
  if (s == "consumer") return Stakeholder::consumer;
  if (s == "provider") return Stakeholder::provider;
  throw DataError("unknown stakeholder '" + s + "'");
}

nlohmann::json parse(const std::string& text, const char* what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed ") + what + ": " + e.what());
  }
}

ojson impact_json(const EdgeImpact& e) {
  ojson j;
  j["stakeholder"] = stakeholder_name(e.stakeholder);
  j["label_advantaged"] = e.label_advantaged;
  j["label_disadvantaged"] = e.label_disadvantaged;
  j["perturbed_advantaged"] = e.perturbed_advantaged;
  j["perturbed_disadvantaged"] = e.perturbed_disadvantaged;
  j["group_size_advantaged"] = e.group_size_advantaged;
  j["group_size_disadvantaged"] = e.group_size_disadvantaged;
  j["EI_advantaged"] = e.ei_advantaged;
  j["EI_disadvantaged"] = e.ei_disadvantaged;
  j["delta_EI"] = e.delta_ei;
  return j;
}

EdgeImpact impact_from(const nlohmann::json& j) {
  EdgeImpact e;
  e.stakeholder = stakeholder_from(j.at("stakeholder").get<std::string>());
  e.label_advantaged = j.at("label_advantaged").get<std::string>();
  e.label_disadvantaged = j.at("label_disadvantaged").get<std::string>();
  e.perturbed_advantaged = j.at("perturbed_advantaged").get<std::size_t>();
  e.perturbed_disadvantaged = j.at("perturbed_disadvantaged").get<std::size_t>();
  e.group_size_advantaged = j.at("group_size_advantaged").get<std::size_t>();
  e.group_size_disadvantaged = j.at("group_size_disadvantaged").get<std::size_t>();
  e.ei_advantaged = j.at("EI_advantaged").get<double>();
  e.ei_disadvantaged = j.at("EI_disadvantaged").get<double>();
  e.delta_ei = j.at("delta_EI").get<double>();
  return e;
}

}  // namespace

RelativeDelta relative_delta(double delta, double metric_original) {
  if (metric_original == 0.0) return {0.0, true};
  return {delta / metric_original, false};
}

EdgeImpact edge_impact(const std::vector<std::pair<Index, Index>>& perturbed,
                       const GroupPartition& partition, int advantaged) {
  if (perturbed.empty()) throw DataError("edge impact needs at least one perturbed edge");
  if (advantaged != 0 && advantaged != 1) throw ConfigError("advantaged must be 0 or 1");
  std::size_t count[2] = {0, 0};
  for (const auto& [u, i] : perturbed) {
    const Index node = partition.stakeholder == Stakeholder::consumer ? u : i;
    if (node >= partition.size()) throw DataError("perturbed edge outside partition");
    ++count[partition.membership[node]];
  }
  const int dis = 1 - advantaged;
  const double total = static_cast<double>(perturbed.size());
  const double z = static_cast<double>(partition.size());
  auto ei = [&](int g) {
    return (static_cast<double>(count[g]) / total) /
           (static_cast<double>(partition.members(g).size()) / z);
  };
  EdgeImpact out;
  out.stakeholder = partition.stakeholder;
  out.label_advantaged = partition.label(advantaged);
  out.label_disadvantaged = partition.label(dis);
  out.perturbed_advantaged = count[advantaged];
  out.perturbed_disadvantaged = count[dis];
  out.group_size_advantaged = partition.members(advantaged).size();
  out.group_size_disadvantaged = partition.members(dis).size();
  out.ei_advantaged = ei(advantaged);
  out.ei_disadvantaged = ei(dis);
  out.delta_ei = out.ei_advantaged - out.ei_disadvantaged;
  return out;
}

RobustnessReport build_report(const AttackResult& result, const AttackConfig& cfg,
                              std::size_t num_candidates) {
  RobustnessReport r;
  r.operationalization = cfg.operationalization;
  r.kind = cfg.kind;
  r.num_candidates = num_candidates;
  r.metric_original = result.original_dp;
  r.metric_best = result.original_dp;
  r.effective = result.effective();
  if (result.best) {
    const auto& best = result.logs[*result.best];
    r.metric_best = best.dp_exact;
    r.delta = best.delta;
    r.best_epoch = best.epoch;
    r.n_perturbed_best = best.n_perturbed;
  }
  r.relative = relative_delta(r.delta, r.metric_original);
  r.epsilon = cfg.epsilon;
  r.gamma = cfg.gamma;
  if (cfg.epsilon || cfg.gamma) {
    r.robust = is_robust(r.delta, r.n_perturbed_best,
                         cfg.epsilon.value_or(std::numeric_limits<double>::infinity()),
                         cfg.gamma.value_or(std::numeric_limits<std::size_t>::max()));
  }
  for (const auto& log : result.logs) {
    r.trend.push_back({log.epoch,
                       static_cast<double>(log.n_perturbed) /
                           static_cast<double>(num_candidates),
                       log.dp_exact, log.delta});
  }
  return r;
}

std::vector<std::pair<Index, Index>> perturbed_edge_list(
    const AttackResult& result, const CandidateEdgeSet& candidates) {
  std::vector<std::pair<Index, Index>> out;
  out.reserve(result.perturbed_edges.size());
  for (std::size_t j : result.perturbed_edges) out.push_back(candidates[j]);
  return out;
}

std::string to_json(const RobustnessReport& r) {
  ojson j;
  j["schema_version"] = kReportSchemaVersion;
  j["operationalization"] = to_string(r.operationalization);
  j["kind"] = to_string(r.kind);
  j["num_candidates"] = r.num_candidates;
  j["M_original"] = r.metric_original;
  j["M_best"] = r.metric_best;
  j["delta"] = r.delta;
  j["relative_delta"] = r.relative.undefined ? ojson(nullptr) : ojson(r.relative.value);
  j["relative_delta_undefined"] = r.relative.undefined;
  j["effective"] = r.effective;
  j["best_epoch"] = optional_json(r.best_epoch);
  j["n_perturbed_best"] = r.n_perturbed_best;
  j["epsilon"] = optional_json(r.epsilon);
  j["gamma"] = optional_json(r.gamma);
  j["robust"] = optional_json(r.robust);
  j["trend"] = ojson::array();
  for (const auto& t : r.trend) {
    j["trend"].push_back(ojson{{"epoch", t.epoch},
                               {"fraction_perturbed", t.fraction_perturbed},
                               {"DP", t.dp},
                               {"delta", t.delta}});
  }
  return j.dump(2) + "\n";
}

RobustnessReport robustness_report_from_json(const std::string& text) {
  const auto j = parse(text, "robustness report");
  try {
    if (j.at("schema_version").get<int>() != kReportSchemaVersion) {
      throw DataError("unsupported report schema version");
    }
    RobustnessReport r;
    r.operationalization =
        fairness_kind_from_string(j.at("operationalization").get<std::string>());
    r.kind = perturbation_kind_from_string(j.at("kind").get<std::string>());
    r.num_candidates = j.at("num_candidates").get<std::size_t>();
    r.metric_original = j.at("M_original").get<double>();
    r.metric_best = j.at("M_best").get<double>();
    r.delta = j.at("delta").get<double>();
    r.relative.undefined = j.at("relative_delta_undefined").get<bool>();
    r.relative.value = r.relative.undefined ? 0.0 : j.at("relative_delta").get<double>();
    r.effective = j.at("effective").get<bool>();
    r.best_epoch = optional_from<std::size_t>(j, "best_epoch");
    r.n_perturbed_best = j.at("n_perturbed_best").get<std::size_t>();
    r.epsilon = optional_from<double>(j, "epsilon");
    r.gamma = optional_from<std::size_t>(j, "gamma");
    r.robust = optional_from<bool>(j, "robust");
    for (const auto& t : j.at("trend")) {
      r.trend.push_back({t.at("epoch").get<std::size_t>(),
                         t.at("fraction_perturbed").get<double>(), t.at("DP").get<double>(),
                         t.at("delta").get<double>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed robustness report: ") + e.what());
  }
}

std::string to_json(const EdgeImpact& impact) { return impact_json(impact).dump(2) + "\n"; }

EdgeImpact edge_impact_from_json(const std::string& text) {
  const auto j = parse(text, "edge impact");
  try {
    return impact_from(j);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed edge impact: ") + e.what());
  }
}

std::string trend_csv(const std::vector<TrendPoint>& trend) {
  std::string out = "epoch,fraction_perturbed,DP,delta\n";
  for (const auto& t : trend) {
    out += std::to_string(t.epoch) + "," + fmt(t.fraction_perturbed) + "," + fmt(t.dp) +
           "," + fmt(t.delta) + "\n";
  }
  return out;
}

std::vector<TrendPoint> trend_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "epoch,fraction_perturbed,DP,delta") {
    throw DataError("trend csv: unexpected header");
  }
  std::vector<TrendPoint> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    TrendPoint t;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream row(line);
    if (!(row >> t.epoch >> c1 >> t.fraction_perturbed >> c2 >> t.dp >> c3 >> t.delta) ||
        c1 != ',' || c2 != ',' || c3 != ',') {
      throw DataError("trend csv: malformed line " + std::to_string(line_no));
    }
    out.push_back(t);
  }
  return out;
}

void emit_report(const std::filesystem::path& dir, const RobustnessReport& report,
                 const std::vector<EdgeImpact>& impacts) {
  std::filesystem::create_directories(dir);
  write_file(dir / "report.json", to_json(report));
  write_file(dir / "trend.csv", trend_csv(report.trend));
  ojson j;
  j["schema_version"] = kReportSchemaVersion;
  j["impacts"] = ojson::array();
  for (const auto& e : impacts) j["impacts"].push_back(impact_json(e));
  write_file(dir / "edge_impact.json", j.dump(2) + "\n");
}

std::string iterations_csv(const AttackResult& result) {
  std::string out =
      "epoch,n_perturbed,gamma,gamma_relaxed,objective,dp_surrogate,dp_exact,delta\n";
  for (const auto& l : result.logs) {
    out += std::to_string(l.epoch) + "," + std::to_string(l.n_perturbed) + "," +
           fmt(l.gamma) + "," + fmt(l.gamma_relaxed) + "," + fmt(l.objective) + "," +
           fmt(l.dp_surrogate) + "," + fmt(l.dp_exact) + "," + fmt(l.delta) + "\n";
  }
  return out;
}

std::vector<IterationLog> iterations_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line != "epoch,n_perturbed,gamma,gamma_relaxed,objective,dp_surrogate,dp_exact,delta") {
    throw DataError("iterations csv: unexpected header");
  }
  std::vector<IterationLog> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream row(line);
    IterationLog l;
    if (!(row >> l.epoch >> l.n_perturbed >> l.gamma >> l.gamma_relaxed >> l.objective >>
          l.dp_surrogate >> l.dp_exact >> l.delta)) {
      throw DataError("iterations csv: malformed line " + std::to_string(line_no));
    }
    out.push_back(l);
  }
  return out;
}

std::string timing_csv(const AttackResult& result) {
  std::string out = "epoch,wall_seconds\n";
  for (const auto& l : result.logs) {
    out += std::to_string(l.epoch) + "," + fmt(l.wall_seconds) + "\n";
  }
  return out;
}

std::size_t num_candidates_from_result_json(const std::string& text) {
  const auto j = parse(text, "result");
  try {
    return j.at("num_candidates").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed result: ") + e.what());
  }
}

std::vector<std::pair<Index, Index>> perturbed_edges_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<Index, Index>> out;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    Index u = 0, i = 0;
    std::string kind;
    if (!(row >> u >> i >> kind)) {
      throw DataError("perturbed edges: malformed line " + std::to_string(line_no));
    }
    out.emplace_back(u, i);
  }
  return out;
}

std::string result_json(const AttackResult& result, const AttackConfig& cfg,
                        std::size_t num_candidates, const MetricReport& original,
                        const MetricReport* best) {
  auto metric = [](const MetricReport& m) {
    return ojson{{"kind", to_string(m.kind)}, {"S1", m.s1},          {"S2", m.s2},
                 {"DP", m.dp},                {"k_eval", m.k_eval}, {"k_opt", m.k_opt}};
  };
  ojson j;
  j["schema_version"] = kReportSchemaVersion;
  j["operationalization"] = to_string(cfg.operationalization);
  j["kind"] = to_string(cfg.kind);
  j["num_candidates"] = num_candidates;
  j["epochs_run"] = result.logs.size();
  j["early_stopped"] = result.early_stopped;
  j["effective"] = result.effective();
  if (!result.effective()) j["status"] = "no effective perturbation found";
  j["original"] = metric(original);
  j["initial_delta"] = result.initial.delta;
  if (result.best) {
    const auto& b = result.logs[*result.best];
    j["best"] = ojson{{"epoch", b.epoch},
                      {"n_perturbed", b.n_perturbed},
                      {"DP", b.dp_exact},
                      {"delta", b.delta}};
    if (best) j["best"]["metric"] = metric(*best);
  } else {
    j["best"] = nullptr;
  }
  return j.dump(2) + "\n";
}

std::string config_json(const AttackConfig& cfg) {
  ojson j;
  j["schema_version"] = kReportSchemaVersion;
  j["operationalization"] = to_string(cfg.operationalization);
  j["consumer_attribute"] = cfg.consumer_attribute;
  j["kind"] = to_string(cfg.kind);
  j["lambda"] = cfg.lambda;
  j["optimizer"] = to_string(cfg.optimizer);
  j["step_size"] = cfg.step_size;
  j["init_magnitude"] = cfg.init_magnitude;
  j["max_epochs"] = cfg.max_epochs;
  j["patience"] = cfg.patience;
  j["min_delta"] = cfg.min_delta;
  j["gamma"] = optional_json(cfg.gamma);
  j["epsilon"] = optional_json(cfg.epsilon);
  j["candidate_cap"] = optional_json(cfg.candidate_cap);
  j["k_eval"] = cfg.k_eval;
  j["tau"] = cfg.tau;
  j["seed"] = cfg.seed;
  return j.dump(2) + "\n";
}

AttackConfig attack_config_from_json(const std::string& text) {
  const auto j = parse(text, "attack config");
  try {
    AttackConfig c;
    c.operationalization =
        fairness_kind_from_string(j.at("operationalization").get<std::string>());
    c.consumer_attribute = j.at("consumer_attribute").get<std::string>();
    c.kind = perturbation_kind_from_string(j.at("kind").get<std::string>());
    c.lambda = j.at("lambda").get<double>();
    c.optimizer = optimizer_kind_from_string(j.at("optimizer").get<std::string>());
    c.step_size = j.at("step_size").get<double>();
    c.init_magnitude = j.at("init_magnitude").get<double>();
    c.max_epochs = j.at("max_epochs").get<std::size_t>();
    c.patience = j.at("patience").get<std::size_t>();
    c.min_delta = j.at("min_delta").get<double>();
    c.gamma = optional_from<std::size_t>(j, "gamma");
    c.epsilon = optional_from<double>(j, "epsilon");
    c.candidate_cap = optional_from<std::size_t>(j, "candidate_cap");
    c.k_eval = j.at("k_eval").get<std::size_t>();
    c.tau = j.at("tau").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed attack config: ") + e.what());
  }
}

std::string perturbed_edges_text(const std::vector<std::pair<Index, Index>>& edges,
                                 PerturbationKind kind) {
  std::string out;
  for (const auto& [u, i] : edges) {
    out += std::to_string(u) + " " + std::to_string(i) + " " + to_string(kind) + "\n";
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace fairrobust
