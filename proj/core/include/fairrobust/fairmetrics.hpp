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

#ifndef FAIRROBUST_FAIRMETRICS_HPP_
#define FAIRROBUST_FAIRMETRICS_HPP_

#include <span>
#include <string>
#include <vector>

#include "fairrobust/dataset.hpp"
#include "fairrobust/model.hpp"

namespace fairrobust {

// Demographic-parity operationalizations.
//   CP: consumer preference, NDCG@k
//   CS: consumer satisfaction, P@k
//   PE: provider exposure
//   PV: provider visibility
enum class FairnessKind { cp, cs, pe, pv };

const char* to_string(FairnessKind kind);
FairnessKind fairness_kind_from_string(const std::string& name);
Stakeholder stakeholder_of(FairnessKind kind);

struct FairnessOperationalization {
  FairnessKind kind = FairnessKind::cp;
  std::size_t k_eval = 10;
  // Cutoff used by the provider surrogates.
  std::size_t k_opt = 10;
  // Temperature of the smooth rank in approx_ndcg.
  double tau = 1.0;
};

// max(k_eval, round(0.1 * n_items))
std::size_t default_k_opt(std::size_t n_items, std::size_t k_eval);

FairnessOperationalization make_operationalization(FairnessKind kind,
                                                   std::size_t n_items,
                                                   std::size_t k_eval = 10,
                                                   double tau = 1.0);

// ---------------------------------------------------------------------------
// Exact metrics

// Binary-gain NDCG@k; `relevant` must be sorted. Ideal DCG spans
// min(k, |relevant|) positions. 0 when nothing is relevant.
double ndcg_at_k(std::span<const Index> list,
                 std::span<const Index> relevant, std::size_t k);

// |hits in the first k positions| / k.
double precision_at_k(std::span<const Index> list,
                      std::span<const Index> relevant, std::size_t k);

// Position-discounted exposure of an item group over all lists, normalized by
// the ideal exposure of each list and by group representation:
//   (|I| / |I*|) * mean_u [ sum_j 1[i_j in I*] / log2(j+1) ]
//                         / [ sum_j 1 / log2(j+1) ]
// Users with empty lists contribute 0.
double exposure(const RecommendationLists& lists,
                std::span<const Index> group_items, std::size_t n_items);

// (|I| / |I*|) * (1 / (|U| k)) * sum_u |q_u@k ∩ I*|
double visibility(const RecommendationLists& lists,
                  std::span<const Index> group_items, std::size_t n_items);

// Squared gap (s1 - s2)^2.
double demographic_parity(double s1, double s2);

// Everything the group metrics need besides the model outputs.
struct EvaluationContext {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  // Sorted per-user items excluded from recommendation (the train split).
  std::vector<std::vector<Index>> exclude;
  // Sorted per-user ground truth (the test split).
  std::vector<std::vector<Index>> relevant;
};

EvaluationContext make_evaluation_context(const SplitDataset& split);

struct MetricReport {
  FairnessKind kind = FairnessKind::cp;
  double s1 = 0.0;
  double s2 = 0.0;
  double dp = 0.0;
  std::size_t k_eval = 0;
  std::size_t k_opt = 0;
  // Per-user values (consumer kinds, NaN for users without ground truth) or
  // per-group values (provider kinds).
  std::vector<double> raw;

  // Index of the group with the larger metric value; group 1 on ties.
  int advantaged() const { return s2 > s1 ? 1 : 0; }
};

std::string to_json(const MetricReport& report);
MetricReport metric_report_from_json(const std::string& text);

// Exact per-group metric and DP on top-k_eval lists. Consumer kinds average
// per-user values over the group's users that have ground truth; provider
// kinds evaluate exposure / visibility of each item group over all lists.
MetricReport group_metric(const FairnessOperationalization& op,
                          const RecommendationLists& lists,
                          const EvaluationContext& ctx,
                          const GroupPartition& partition);

// ---------------------------------------------------------------------------
// Differentiable surrogates. Each returns its value and the gradient w.r.t.
// the scores it was given.

struct SmoothValue {
  double value = 0.0;
  std::vector<double> gradient;
};

// Smooth rank r(i) = 1 + sum_{j != i} sigmoid((s_j - s_i) / tau). DCG sums
// 1 / log2(r(i) + 1) over `relevant` (positions into `scores`), divided by the
// ideal DCG over |relevant| positions.
SmoothValue approx_ndcg(std::span<const double> scores,
                        std::span<const Index> relevant, double tau);

enum class BceWeighting {
  // Plain mean over all entries.
  uniform,
  // Positives and negatives averaged separately, then averaged.
  balanced,
};

// Mean binary cross entropy between sigmoid(scores) and 0/1 targets.
SmoothValue bce_topk_surrogate(std::span<const double> scores,
                               std::span<const std::uint8_t> targets,
                               BceWeighting weighting = BceWeighting::uniform);

// Exposure ratio of one list with the group indicator replaced by the
// predicted relevance sigmoid(s): items are ranked by score (the ranking
// itself carries no gradient), the first k_opt are kept, and
//   sum_j in_group_j * sigmoid(s_j) / log2(j+1)  /  sum_j 1 / log2(j+1).
SmoothValue exposure_surrogate(std::span<const double> scores,
                               std::span<const std::uint8_t> in_group,
                               std::size_t k_opt);

struct SurrogateReport {
  double s1 = 0.0;
  double s2 = 0.0;
  double dp = 0.0;
  // d dp / d scores, shaped like the input score matrix.
  Matrix gradient;
};

// Differentiable group metric and DP. `scores` holds one row per entry of
// `users` over all items; excluded items take no part in rankings.
//   CP: mean approx_ndcg per group.
//   CS: mean per-user class-balanced BCE against the test items.
//   PE: exposure_surrogate per item group, scaled as the exact exposure.
//   PV: mean per-user class-balanced BCE over the candidate items with
//       targets = membership in the item group.
SurrogateReport group_metric_surrogate(const FairnessOperationalization& op,
                                       const Matrix& scores,
                                       std::span<const Index> users,
                                       const EvaluationContext& ctx,
                                       const GroupPartition& partition);

// Users whose rows enter the metric: users with ground truth for consumer
// kinds, everyone for provider kinds.
std::vector<Index> evaluated_users(FairnessKind kind,
                                   const EvaluationContext& ctx);

}  // namespace fairrobust

#endif  // FAIRROBUST_FAIRMETRICS_HPP_
