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

#ifndef FAIRROBUST_REPORT_HPP_
#define FAIRROBUST_REPORT_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fairrobust/attack.hpp"

namespace fairrobust {

inline constexpr int kReportSchemaVersion = 1;

struct RelativeDelta {
  double value = 0.0;
  // Original metric was zero; value is meaningless.
  bool undefined = false;

  bool operator==(const RelativeDelta&) const = default;
};

RelativeDelta relative_delta(double delta, double metric_original);

struct TrendPoint {
  std::size_t epoch = 0;
  double fraction_perturbed = 0.0;
  double dp = 0.0;
  double delta = 0.0;

  bool operator==(const TrendPoint&) const = default;
};

struct RobustnessReport {
  FairnessKind operationalization = FairnessKind::cp;
  PerturbationKind kind = PerturbationKind::deletion;
  std::size_t num_candidates = 0;
  double metric_original = 0.0;
  double metric_best = 0.0;
  double delta = 0.0;
  RelativeDelta relative;
  bool effective = false;
  std::optional<std::size_t> best_epoch;
  std::size_t n_perturbed_best = 0;
  std::optional<double> epsilon;
  std::optional<std::size_t> gamma;
  // Set when both epsilon and gamma are configured.
  std::optional<bool> robust;
  std::vector<TrendPoint> trend;

  bool operator==(const RobustnessReport&) const = default;
};

struct EdgeImpact {
  Stakeholder stakeholder = Stakeholder::consumer;
  std::string label_advantaged;
  std::string label_disadvantaged;
  std::size_t perturbed_advantaged = 0;
  std::size_t perturbed_disadvantaged = 0;
  std::size_t group_size_advantaged = 0;
  std::size_t group_size_disadvantaged = 0;
  double ei_advantaged = 0.0;
  double ei_disadvantaged = 0.0;
  double delta_ei = 0.0;

  bool operator==(const EdgeImpact&) const = default;
};

// EI_g = (|perturbed edges touching g| / |perturbed|) / (|g| / |Z|), with
// consumer edges attributed to their user and provider edges to their item.
// `advantaged` is 0 or 1 (group 1 or group 2 of the partition).
EdgeImpact edge_impact(const std::vector<std::pair<Index, Index>>& perturbed,
                       const GroupPartition& partition, int advantaged);

RobustnessReport build_report(const AttackResult& result,
                              const AttackConfig& cfg,
                              std::size_t num_candidates);

std::vector<std::pair<Index, Index>> perturbed_edge_list(
    const AttackResult& result, const CandidateEdgeSet& candidates);

std::string to_json(const RobustnessReport& report);
RobustnessReport robustness_report_from_json(const std::string& text);
std::string to_json(const EdgeImpact& impact);
EdgeImpact edge_impact_from_json(const std::string& text);

// epoch,fraction_perturbed,DP,delta
std::string trend_csv(const std::vector<TrendPoint>& trend);
std::vector<TrendPoint> trend_from_csv(const std::string& text);

// Writes report.json, trend.csv and edge_impact.json (consumer and provider
// attributions) into `dir`.
void emit_report(const std::filesystem::path& dir,
                 const RobustnessReport& report,
                 const std::vector<EdgeImpact>& impacts);

// Attack run directory artifacts.
// Per-iteration log without wall time, so that reruns compare byte for byte.
std::string iterations_csv(const AttackResult& result);
std::vector<IterationLog> iterations_from_csv(const std::string& text);
// epoch,wall_seconds
std::string timing_csv(const AttackResult& result);
std::string result_json(const AttackResult& result, const AttackConfig& cfg,
                        std::size_t num_candidates, const MetricReport& original,
                        const MetricReport* best);
std::size_t num_candidates_from_result_json(const std::string& text);
std::vector<std::pair<Index, Index>> perturbed_edges_from_text(const std::string& text);
std::string config_json(const AttackConfig& cfg);
AttackConfig attack_config_from_json(const std::string& text);
std::string perturbed_edges_text(
    const std::vector<std::pair<Index, Index>>& edges, PerturbationKind kind);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace fairrobust

#endif  // FAIRROBUST_REPORT_HPP_
