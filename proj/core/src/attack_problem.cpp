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

#include <cmath>

#include "fairrobust/attack.hpp"

namespace fairrobust {

FairnessAttackProblem::FairnessAttackProblem(const GraphRecommender& model,
                                             AdjacencyMatrix original,
                                             CandidateEdgeSet candidates,
                                             FairnessOperationalization op,
                                             GroupPartition partition,
                                             EvaluationContext context, double lambda)
    : model_(model),
      adjacency_(std::move(original)),
      candidates_(std::move(candidates)),
      op_(op),
      partition_(std::move(partition)),
      context_(std::move(context)),
      lambda_(lambda) {
  if (model_.num_users() != adjacency_.num_users() ||
      model_.num_items() != adjacency_.num_items()) {
    throw DataError("model and adjacency disagree on graph size");
  }
  if (partition_.stakeholder != stakeholder_of(op_.kind)) {
    throw ConfigError("partition stakeholder does not match operationalization");
  }
  users_ = evaluated_users(op_.kind, context_);
  if (users_.empty()) throw DataError("no user can be evaluated");
  original_ = evaluate(adjacency_);
}

MetricReport FairnessAttackProblem::evaluate(const AdjacencyMatrix& adjacency) const {
  const Matrix scores = model_.scores(adjacency, users_);
  const auto lists = recommend_topk(scores, users_, op_.k_eval, context_.exclude);
  return group_metric(op_, lists, context_, partition_);
}

SurrogateEvaluation FairnessAttackProblem::surrogate(const PerturbationVector& p) const {
  const auto relaxed = relax(p);
  const AdjacencyMatrix perturbed = apply_perturbation(adjacency_, candidates_, relaxed);
  const Matrix scores = model_.scores(perturbed, users_);
  const SurrogateReport metric =
      group_metric_surrogate(op_, scores, users_, context_, partition_);
  const auto entry_grad = model_.adjacency_vjp(perturbed, users_, metric.gradient);
  const Distance distance = perturbation_distance(adjacency_, candidates_, p);

  SurrogateEvaluation out;
  out.dp = metric.dp;
  out.gamma = distance.value;
  // The penalty sees the distance as a fraction of the candidate set so that
  // lambda does not scale with the graph size.
  const double scale = candidates_.size() == 0 ? 0.0 : 1.0 / static_cast<double>(candidates_.size());
  const double gamma = distance.value * scale;
  out.objective = objective(metric.dp, gamma, lambda_);
  out.gradient.assign(p.weights.size(), 0.0);
  for (std::size_t j = 0; j < candidates_.size(); ++j) {
    const auto [u, i] = candidates_[j];
    const double s = relaxed[j];
    double d_dp = 0.0;
    if (const auto pos = perturbed.find(u, i)) d_dp = entry_grad[*pos] * s * (1.0 - s);
    out.gradient[j] = -d_dp + 2.0 * lambda_ * gamma * scale * distance.gradient[j];
  }
  return out;
}

MetricReport FairnessAttackProblem::exact_report(std::span<const std::uint8_t> mask) const {
  return evaluate(apply_perturbation(adjacency_, candidates_, mask));
}

ExactEvaluation FairnessAttackProblem::exact(std::span<const std::uint8_t> mask) const {
  return {exact_report(mask).dp, count_perturbed(candidates_, mask)};
}

AttackSetup run_attack(const SplitDataset& split, const Dataset& ds,
                       const GraphRecommender& model, const AttackConfig& cfg) {
  validate(cfg);
  AdjacencyMatrix adjacency = build_adjacency(split.train, split.num_users, split.num_items);
  CandidateEdgeSet candidates =
      candidate_edges(adjacency, cfg.kind, cfg.candidate_cap, cfg.seed);
  const auto op = make_operationalization(cfg.operationalization, split.num_items,
                                          cfg.k_eval, cfg.tau);
  GroupPartition partition =
      stakeholder_of(cfg.operationalization) == Stakeholder::consumer
          ? partition_consumers(ds, cfg.consumer_attribute)
          : partition_providers_by_popularity(split);
  AttackSetup setup;
  setup.problem = std::make_unique<FairnessAttackProblem>(
      model, std::move(adjacency), std::move(candidates), op, std::move(partition),
      make_evaluation_context(split), cfg.lambda);
  setup.result = run_attack(*setup.problem, cfg);
  return setup;
}

}  // namespace fairrobust
