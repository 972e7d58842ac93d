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

#include "fairrobust/attack.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace fairrobust {

const char* to_string(OptimizerKind kind) {
  return kind == OptimizerKind::adam ? "adam" : "normalized_momentum";
}

OptimizerKind optimizer_kind_from_string(const std::string& name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "normalized_momentum") return OptimizerKind::normalized_momentum;
  throw ConfigError("unknown optimizer '" + name +
                    "' (expected adam|normalized_momentum)");
}

void validate(const AttackConfig& cfg) {
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) {
    throw ConfigError("lambda must be a finite value >= 0");
  }
  if (cfg.max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (cfg.patience < 1) throw ConfigError("patience must be >= 1");
  if (!(cfg.min_delta >= 0.0)) throw ConfigError("min_delta must be >= 0");
  if (!(cfg.step_size > 0.0)) throw ConfigError("step size must be > 0");
  if (cfg.k_eval < 1) throw ConfigError("k_eval must be >= 1");
  if (!(cfg.tau > 0.0)) throw ConfigError("tau must be > 0");
  if (cfg.epsilon && !(*cfg.epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  if (cfg.candidate_cap && *cfg.candidate_cap == 0) {
    throw ConfigError("candidate cap must be >= 1");
  }
}

double objective(double dp_surrogate, double gamma, double lambda) {
  return -dp_surrogate + lambda * gamma * gamma;
}

double delta(double metric_perturbed, double metric_original) {
  return metric_perturbed - metric_original;
}

bool is_robust(double delta, std::size_t n_perturbed, double epsilon,
               std::size_t gamma) {
  return delta * delta <= epsilon && n_perturbed <= gamma;
}

PerturbationOptimizer::PerturbationOptimizer(OptimizerKind kind, double step_size,
                                             std::size_t size)
    : kind_(kind), step_size_(step_size), m_(size, 0.0), v_(size, 0.0) {}

void PerturbationOptimizer::step(std::vector<double>& weights,
                                 std::span<const double> gradient) {
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  ++t_;
  if (kind_ == OptimizerKind::adam) {
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t j = 0; j < weights.size(); ++j) {
      m_[j] = beta1 * m_[j] + (1.0 - beta1) * gradient[j];
      v_[j] = beta2 * v_[j] + (1.0 - beta2) * gradient[j] * gradient[j];
      weights[j] -= step_size_ * (m_[j] / c1) / (std::sqrt(v_[j] / c2) + eps);
    }
    return;
  }
  double largest = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    m_[j] = beta1 * m_[j] + gradient[j];
    largest = std::max(largest, std::abs(m_[j]));
  }
  if (largest == 0.0) return;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    weights[j] -= step_size_ * m_[j] / largest;
  }
}

IterationLog attack_step(const AttackProblem& problem, PerturbationVector& p,
                         PerturbationOptimizer& optimizer, std::size_t epoch,
                         std::optional<std::size_t> budget) {
  const auto start = std::chrono::steady_clock::now();
  const SurrogateEvaluation eval = problem.surrogate(p);
  for (std::size_t j = 0; j < eval.gradient.size(); ++j) {
    if (!std::isfinite(eval.gradient[j])) {
      throw NumericError("non-finite gradient at candidate " + std::to_string(j) +
                         " in epoch " + std::to_string(epoch) + " (objective " +
                         std::to_string(eval.objective) + ", weight " +
                         std::to_string(p.weights[j]) + ")");
    }
  }
  optimizer.step(p.weights, eval.gradient);
  const auto mask = budget ? binarize(p, *budget) : binarize(p);
  const ExactEvaluation exact = problem.exact(mask);

  IterationLog log;
  log.epoch = epoch;
  log.n_perturbed = exact.n_perturbed;
  log.gamma = static_cast<double>(exact.n_perturbed);
  log.gamma_relaxed = eval.gamma;
  log.objective = eval.objective;
  log.dp_surrogate = eval.dp;
  log.dp_exact = exact.dp;
  log.delta = delta(exact.dp, problem.original_dp());
  log.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start).count();
  return log;
}

bool should_stop(std::span<const double> deltas, std::size_t patience,
                 double min_delta) {
  const std::size_t epochs = deltas.size();
  if (epochs <= patience) return false;
  const std::size_t window_start = epochs - patience;
  const double before =
      *std::max_element(deltas.begin(), deltas.begin() + static_cast<std::ptrdiff_t>(window_start));
  const double in_window =
      *std::max_element(deltas.begin() + static_cast<std::ptrdiff_t>(window_start), deltas.end());
  return in_window - before < min_delta;
}

bool eligible_for_best(const IterationLog& log, std::optional<std::size_t> gamma) {
  return log.n_perturbed >= 1 && (!gamma || log.n_perturbed <= *gamma);
}

std::optional<std::size_t> best_iteration(std::span<const IterationLog> logs,
                                          std::optional<std::size_t> gamma) {
  std::optional<std::size_t> best;
  for (std::size_t t = 0; t < logs.size(); ++t) {
    if (!eligible_for_best(logs[t], gamma)) continue;
    if (!best || std::abs(logs[t].delta) > std::abs(logs[*best].delta)) best = t;
  }
  return best;
}

AttackResult run_attack(const AttackProblem& problem, const AttackConfig& cfg) {
  validate(cfg);
  const std::size_t n = problem.num_candidates();
  if (n == 0) throw DataError("attack has no candidate edges");

  AttackResult result;
  result.original_dp = problem.original_dp();
  PerturbationVector p;
  p.kind = problem.kind();
  const double m = std::abs(cfg.init_magnitude);
  p.weights.assign(n, p.kind == PerturbationKind::deletion
                          ? m
                          : (m == 0.0 ? -std::numeric_limits<double>::min() : -m));

  const auto initial = problem.exact(binarize(p));
  result.initial.n_perturbed = initial.n_perturbed;
  result.initial.dp_exact = initial.dp;
  result.initial.delta = delta(initial.dp, result.original_dp);

  PerturbationOptimizer optimizer(cfg.optimizer, cfg.step_size, n);
  std::vector<double> deltas;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    IterationLog log = attack_step(problem, p, optimizer, epoch, cfg.gamma);
    if (eligible_for_best(log, cfg.gamma) && (!result.best ||
                     std::abs(log.delta) > std::abs(result.logs[*result.best].delta))) {
      result.best = result.logs.size();
      result.best_perturbation = p;
    }
    deltas.push_back(log.delta);
    result.logs.push_back(log);
    if (should_stop(deltas, cfg.patience, cfg.min_delta)) {
      result.early_stopped = true;
      break;
    }
  }
  result.final_perturbation = p;
  if (result.best) {
    result.best_mask = cfg.gamma ? binarize(result.best_perturbation, *cfg.gamma)
                                 : binarize(result.best_perturbation);
    const std::uint8_t original = p.kind == PerturbationKind::deletion ? 1 : 0;
    for (std::size_t j = 0; j < result.best_mask.size(); ++j) {
      if (result.best_mask[j] != original) result.perturbed_edges.push_back(j);
    }
  }
  return result;
}

}  // namespace fairrobust
