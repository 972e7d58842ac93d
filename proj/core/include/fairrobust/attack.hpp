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

#ifndef FAIRROBUST_ATTACK_HPP_
#define FAIRROBUST_ATTACK_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairrobust/fairmetrics.hpp"
#include "fairrobust/graph.hpp"
#include "fairrobust/model.hpp"

namespace fairrobust {

enum class OptimizerKind {
  // Adam: momentum with per-coordinate second-moment scaling.
  adam,
  // Momentum with the step rescaled so the largest coordinate moves by the
  // step size. Coordinates keep their relative gradient magnitudes.
  normalized_momentum,
};

const char* to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& name);

struct AttackConfig {
  FairnessKind operationalization = FairnessKind::cp;
  std::string consumer_attribute = "gender";
  PerturbationKind kind = PerturbationKind::deletion;
  double lambda = 0.01;
  OptimizerKind optimizer = OptimizerKind::adam;
  double step_size = 0.1;
  double init_magnitude = kDefaultInitMagnitude;
  std::size_t max_epochs = 200;
  std::size_t patience = 15;
  double min_delta = 0.001;
  // Edge budget; iterations above it are not eligible as best.
  std::optional<std::size_t> gamma;
  // Robustness threshold on the squared gap.
  std::optional<double> epsilon;
  // Cap on addition candidates.
  std::optional<std::size_t> candidate_cap;
  std::size_t k_eval = 10;
  double tau = 1.0;
  std::uint64_t seed = 0;
};

// Throws ConfigError on invalid values.
void validate(const AttackConfig& cfg);

struct IterationLog {
  std::size_t epoch = 0;
  std::size_t n_perturbed = 0;
  // Distance on the binarized view (equals n_perturbed) and on the relaxed
  // view that entered the objective.
  double gamma = 0.0;
  double gamma_relaxed = 0.0;
  double objective = 0.0;
  double dp_surrogate = 0.0;
  double dp_exact = 0.0;
  double delta = 0.0;
  double wall_seconds = 0.0;
};

struct AttackResult {
  // Evaluation of the initial (identity) perturbation.
  IterationLog initial;
  std::vector<IterationLog> logs;
  double original_dp = 0.0;
  // Index into logs of the eligible iteration with the largest |delta|.
  std::optional<std::size_t> best;
  std::vector<std::size_t> perturbed_edges;  // candidate positions at best
  PerturbationVector final_perturbation;
  PerturbationVector best_perturbation;
  // Binarized (and budget-limited) view of best_perturbation.
  std::vector<std::uint8_t> best_mask;
  bool early_stopped = false;

  bool effective() const { return best.has_value(); }
};

// -dp + lambda * gamma^2
double objective(double dp_surrogate, double gamma, double lambda);

// Robustness gap of the perturbed system w.r.t. the original one.
double delta(double metric_perturbed, double metric_original);

// delta^2 <= epsilon and n_perturbed <= gamma.
bool is_robust(double delta, std::size_t n_perturbed, double epsilon,
               std::size_t gamma);

struct SurrogateEvaluation {
  double objective = 0.0;
  double dp = 0.0;
  double gamma = 0.0;
  std::vector<double> gradient;  // d objective / d weights
};

struct ExactEvaluation {
  double dp = 0.0;
  std::size_t n_perturbed = 0;
};

// What the optimization loop sees of a concrete attack. Implementations must
// be deterministic.
class AttackProblem {
 public:
  virtual ~AttackProblem() = default;

  virtual PerturbationKind kind() const = 0;
  virtual std::size_t num_candidates() const = 0;
  virtual double original_dp() const = 0;
  virtual SurrogateEvaluation surrogate(const PerturbationVector& p) const = 0;
  virtual ExactEvaluation exact(std::span<const std::uint8_t> mask) const = 0;
};

// Perturbation attack on a graph recommender with frozen parameters. The
// surrogate path feeds the relaxed adjacency through the model; the exact
// path evaluates top-k lists on the binarized adjacency.
class FairnessAttackProblem final : public AttackProblem {
 public:
  FairnessAttackProblem(const GraphRecommender& model, AdjacencyMatrix original,
                        CandidateEdgeSet candidates,
                        FairnessOperationalization op, GroupPartition partition,
                        EvaluationContext context, double lambda);

  PerturbationKind kind() const override { return candidates_.kind(); }
  std::size_t num_candidates() const override { return candidates_.size(); }
  double original_dp() const override { return original_.dp; }
  SurrogateEvaluation surrogate(const PerturbationVector& p) const override;
  ExactEvaluation exact(std::span<const std::uint8_t> mask) const override;

  // Exact metric report on the binarized perturbation.
  MetricReport exact_report(std::span<const std::uint8_t> mask) const;
  const MetricReport& original_report() const { return original_; }
  const CandidateEdgeSet& candidates() const { return candidates_; }
  const AdjacencyMatrix& adjacency() const { return adjacency_; }
  const GroupPartition& partition() const { return partition_; }
  const FairnessOperationalization& operationalization() const { return op_; }

 private:
  MetricReport evaluate(const AdjacencyMatrix& adjacency) const;

  const GraphRecommender& model_;
  AdjacencyMatrix adjacency_;
  CandidateEdgeSet candidates_;
  FairnessOperationalization op_;
  GroupPartition partition_;
  EvaluationContext context_;
  double lambda_;
  std::vector<Index> users_;
  std::vector<Index> all_users_;
  MetricReport original_;
};

// Optimizer state over the perturbation weights.
class PerturbationOptimizer {
 public:
  PerturbationOptimizer(OptimizerKind kind, double step_size, std::size_t size);
  void step(std::vector<double>& weights, std::span<const double> gradient);

 private:
  OptimizerKind kind_;
  double step_size_;
  std::size_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

// One gradient step on p followed by an exact evaluation of the updated
// binarized perturbation, keeping at most `budget` flips when one is given.
// Throws NumericError on a non-finite gradient.
IterationLog attack_step(const AttackProblem& problem, PerturbationVector& p,
                         PerturbationOptimizer& optimizer, std::size_t epoch,
                         std::optional<std::size_t> budget = std::nullopt);

// Early-stop rule: with deltas[0] being epoch 1, stop after epoch e when
// e > patience and max over the last `patience` epochs of
// (delta - best delta before that window) < min_delta.
bool should_stop(std::span<const double> deltas, std::size_t patience,
                 double min_delta);

// At least one flipped edge and within the budget, if any.
bool eligible_for_best(const IterationLog& log, std::optional<std::size_t> gamma);
// Eligible iteration with the largest |delta|; the earliest wins ties.
std::optional<std::size_t> best_iteration(std::span<const IterationLog> logs,
                                          std::optional<std::size_t> gamma);

AttackResult run_attack(const AttackProblem& problem, const AttackConfig& cfg);

// Builds the candidate set, partition and context from the split, then runs.
struct AttackSetup {
  std::unique_ptr<FairnessAttackProblem> problem;
  AttackResult result;
};
AttackSetup run_attack(const SplitDataset& split, const Dataset& ds,
                       const GraphRecommender& model, const AttackConfig& cfg);

}  // namespace fairrobust

#endif  // FAIRROBUST_ATTACK_HPP_
