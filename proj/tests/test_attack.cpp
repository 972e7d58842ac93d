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
#include <functional>
#include <limits>

#include <gtest/gtest.h>

#include "fairrobust/attack.hpp"
#include "support/oracles.hpp"

namespace fairrobust {
namespace {

// Scripted problem: the gradient is fixed, the exact DP is a function of the
// epoch (number of exact evaluations after the initial one).
class StubProblem final : public AttackProblem {
 public:
  StubProblem(std::size_t n, std::function<double(std::size_t)> dp_at,
              std::vector<double> gradient = {})
      : n_(n), dp_at_(std::move(dp_at)), gradient_(std::move(gradient)) {
    if (gradient_.empty()) gradient_.assign(n_, 1.0);
  }

  PerturbationKind kind() const override { return PerturbationKind::deletion; }
  std::size_t num_candidates() const override { return n_; }
  double original_dp() const override { return 0.5; }
  SurrogateEvaluation surrogate(const PerturbationVector&) const override {
    return {0.0, 0.0, 0.0, gradient_};
  }
  ExactEvaluation exact(std::span<const std::uint8_t> mask) const override {
    std::size_t flipped = 0;
    for (auto m : mask) flipped += m == 0;
    const double dp = calls_ == 0 ? original_dp() : dp_at_(calls_);
    ++calls_;
    return {dp, flipped};
  }

 private:
  std::size_t n_;
  std::function<double(std::size_t)> dp_at_;
  std::vector<double> gradient_;
  mutable std::size_t calls_ = 0;
};

TEST(Objective, HandValues) {
  EXPECT_EQ(objective(0.0, 0.0, 0.5), 0.0);
  EXPECT_NEAR(objective(0.04, 2.0, 0.1), 0.36, 1e-15);
  EXPECT_EQ(delta(0.3, 0.1), 0.3 - 0.1);
  EXPECT_TRUE(is_robust(0.01, 3, 1e-4, 3));
  EXPECT_FALSE(is_robust(0.011, 3, 1e-4, 3));
  EXPECT_FALSE(is_robust(0.0, 4, 1e-4, 3));
}

TEST(Config, Validation) {
  AttackConfig ok;
  EXPECT_NO_THROW(validate(ok));
  auto bad = [&](auto mutate) {
    AttackConfig c;
    mutate(c);
    EXPECT_THROW(validate(c), ConfigError);
  };
  bad([](AttackConfig& c) { c.lambda = -1.0; });
  bad([](AttackConfig& c) { c.lambda = std::numeric_limits<double>::infinity(); });
  bad([](AttackConfig& c) { c.max_epochs = 0; });
  bad([](AttackConfig& c) { c.patience = 0; });
  bad([](AttackConfig& c) { c.min_delta = -0.1; });
  bad([](AttackConfig& c) { c.step_size = 0.0; });
  bad([](AttackConfig& c) { c.tau = 0.0; });
  bad([](AttackConfig& c) { c.candidate_cap = 0; });
  EXPECT_EQ(optimizer_kind_from_string("adam"), OptimizerKind::adam);
  EXPECT_THROW(optimizer_kind_from_string("sgd"), ConfigError);
}

TEST(EarlyStop, SlidingWindow) {
  std::vector<double> d(15, 0.0);
  EXPECT_FALSE(should_stop(d, 15, 0.001));
  d.push_back(0.0);
  EXPECT_TRUE(should_stop(d, 15, 0.001));
  // An improvement of at least min_delta inside the window keeps it going.
  d.back() = 0.001;
  EXPECT_FALSE(should_stop(d, 15, 0.001));
  d.back() = 0.0009;
  EXPECT_TRUE(should_stop(d, 15, 0.001));
}

TEST(RunAttack, ConstantDpStopsAfterPatiencePlusOne) {
  const StubProblem problem(4, [](std::size_t) { return 0.5; });
  const AttackResult r = run_attack(problem, AttackConfig{});
  EXPECT_EQ(r.logs.size(), 16u);
  EXPECT_TRUE(r.early_stopped);
}

TEST(RunAttack, IncreasingDpRunsAllEpochs) {
  const StubProblem problem(4, [](std::size_t t) { return 0.5 + 0.01 * t; });
  const AttackResult r = run_attack(problem, AttackConfig{});
  EXPECT_EQ(r.logs.size(), 200u);
  EXPECT_FALSE(r.early_stopped);
  ASSERT_TRUE(r.best);
  EXPECT_EQ(r.logs[*r.best].epoch, 200u);
}

TEST(RunAttack, BestIsLargestAbsoluteDeltaWithAFlip) {
  // Epoch 1 flips nothing (weights move from 0.1 to 0.0); the largest |delta|
  // among flipped iterations is the negative one at epoch 3.
  const std::vector<double> dp = {0.0, 0.9, 0.6, 0.1, 0.4};
  const StubProblem problem(3, [&](std::size_t t) { return dp[std::min<std::size_t>(t, 4)]; });
  AttackConfig cfg;
  cfg.max_epochs = 5;
  const AttackResult r = run_attack(problem, cfg);
  ASSERT_TRUE(r.best);
  EXPECT_EQ(r.logs[0].n_perturbed, 0u);
  EXPECT_EQ(r.logs[*r.best].epoch, 3u);
  EXPECT_NEAR(r.logs[*r.best].delta, -0.4, 1e-15);
  EXPECT_EQ(r.perturbed_edges, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(best_iteration(r.logs, std::nullopt), r.best);
}

TEST(RunAttack, BudgetLimitsEveryIterate) {
  const StubProblem problem(3, [](std::size_t t) { return 0.5 + 0.1 * t; }, {1.0, 3.0, 2.0});
  AttackConfig cfg;
  cfg.gamma = 2;
  const AttackResult r = run_attack(problem, cfg);
  for (const auto& log : r.logs) EXPECT_LE(log.n_perturbed, 2u);
  ASSERT_TRUE(r.best.has_value());
  // The two candidates with the largest gradients are the ones kept.
  EXPECT_EQ(r.perturbed_edges, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(r.best_mask, (std::vector<std::uint8_t>{1, 0, 0}));

  cfg.gamma = 0;
  EXPECT_FALSE(run_attack(StubProblem(3, [](std::size_t) { return 0.9; }), cfg).best);
}

TEST(RunAttack, TiesKeepTheEarliestIteration) {
  std::vector<IterationLog> logs(4);
  for (std::size_t t = 0; t < 4; ++t) {
    logs[t].epoch = t + 1;
    logs[t].n_perturbed = t;
  }
  logs[1].delta = 0.2;
  logs[2].delta = -0.2;
  logs[3].delta = 0.2;
  EXPECT_EQ(best_iteration(logs, std::nullopt), std::optional<std::size_t>(1));
  EXPECT_EQ(best_iteration(logs, std::optional<std::size_t>(0)), std::nullopt);
}

TEST(RunAttack, NonFiniteGradientIsANumericError) {
  const StubProblem problem(2, [](std::size_t) { return 0.5; },
                            {1.0, std::numeric_limits<double>::quiet_NaN()});
  EXPECT_THROW(run_attack(problem, AttackConfig{}), NumericError);
}

TEST(Optimizer, NormalizedMomentumMovesLargestByStep) {
  PerturbationOptimizer opt(OptimizerKind::normalized_momentum, 0.1, 3);
  std::vector<double> w = {0.0, 0.0, 0.0};
  const std::vector<double> g = {2.0, -1.0, 0.0};
  opt.step(w, g);
  EXPECT_EQ(w, (std::vector<double>{-0.1, 0.05, 0.0}));
  opt.step(w, g);
  EXPECT_NEAR(w[0], -0.2, 1e-15);
}

TEST(Optimizer, AdamFirstStepIsSignSized) {
  PerturbationOptimizer opt(OptimizerKind::adam, 0.1, 2);
  std::vector<double> w = {0.0, 0.0};
  const std::vector<double> g = {1e-6, -3.0};
  opt.step(w, g);
  EXPECT_NEAR(w[0], -0.1, 1e-3);
  EXPECT_NEAR(w[1], 0.1, 1e-9);
}

// Real problem on a tiny instance.
struct TinyProblem {
  testing::TinyInstance inst;
  std::unique_ptr<LightGcn> model;
  std::unique_ptr<FairnessAttackProblem> problem;

  TinyProblem(FairnessKind op_kind, PerturbationKind kind, std::size_t layers, double lambda,
              std::uint64_t seed = 3, std::size_t users = 6, std::size_t items = 8) {
    inst = testing::make_tiny_instance(users, items, seed);
    RecModelConfig cfg;
    cfg.dim = 4;
    model = std::make_unique<LightGcn>(init_params(users, items, cfg, seed + 100), layers);
    auto adjacency = build_adjacency(inst.split.train, users, items);
    auto cands = candidate_edges(adjacency, kind);
    const auto& part =
        stakeholder_of(op_kind) == Stakeholder::consumer ? inst.consumers : inst.providers;
    problem = std::make_unique<FairnessAttackProblem>(
        *model, adjacency, cands, make_operationalization(op_kind, items, 3), part,
        make_evaluation_context(inst.split), lambda);
  }
};

TEST(FairnessProblem, IdentityPerturbationKeepsMetricExactly) {
  for (auto op : {FairnessKind::cp, FairnessKind::cs, FairnessKind::pe, FairnessKind::pv}) {
    for (auto kind : {PerturbationKind::deletion, PerturbationKind::addition}) {
      TinyProblem t(op, kind, 2, 0.01);
      const auto p = init_perturbation(t.problem->candidates());
      const auto mask = binarize(p);
      EXPECT_EQ(apply_perturbation(t.problem->adjacency(), t.problem->candidates(), mask),
                t.problem->adjacency());
      const ExactEvaluation e = t.problem->exact(mask);
      EXPECT_EQ(e.n_perturbed, 0u);
      EXPECT_EQ(e.dp, t.problem->original_dp());
      EXPECT_EQ(delta(e.dp, t.problem->original_dp()), 0.0);
    }
  }
}

class GradientCheck
    : public ::testing::TestWithParam<
          std::tuple<FairnessKind, PerturbationKind, std::size_t, double>> {};

TEST_P(GradientCheck, SurrogateObjectiveMatchesCentralDifferences) {
  const auto [op, kind, layers, lambda] = GetParam();
  TinyProblem t(op, kind, layers, lambda);
  PerturbationVector p{kind, {}};
  for (std::size_t j = 0; j < t.problem->num_candidates(); ++j) {
    p.weights.push_back(std::sin(1.7 * static_cast<double>(j) + 0.3));
  }
  const SurrogateEvaluation s = t.problem->surrogate(p);
  auto f = [&](const std::vector<double>& w) {
    return t.problem->surrogate(PerturbationVector{kind, w}).objective;
  };
  EXPECT_LT(testing::relative_error(s.gradient, testing::central_differences(f, p.weights, 1e-5)),
            1e-4);
}

INSTANTIATE_TEST_SUITE_P(
    AllObjectives, GradientCheck,
    ::testing::Combine(::testing::Values(FairnessKind::cp, FairnessKind::cs, FairnessKind::pe,
                                         FairnessKind::pv),
                       ::testing::Values(PerturbationKind::deletion, PerturbationKind::addition),
                       ::testing::Values(1u, 2u), ::testing::Values(0.0, 0.01)));

TEST(FairnessProblem, RunIsDeterministic) {
  TinyProblem a(FairnessKind::cp, PerturbationKind::deletion, 2, 0.01);
  TinyProblem b(FairnessKind::cp, PerturbationKind::deletion, 2, 0.01);
  AttackConfig cfg;
  cfg.max_epochs = 30;
  const auto ra = run_attack(*a.problem, cfg);
  const auto rb = run_attack(*b.problem, cfg);
  ASSERT_EQ(ra.logs.size(), rb.logs.size());
  for (std::size_t t = 0; t < ra.logs.size(); ++t) {
    EXPECT_EQ(ra.logs[t].objective, rb.logs[t].objective);
    EXPECT_EQ(ra.logs[t].dp_exact, rb.logs[t].dp_exact);
  }
  EXPECT_EQ(ra.final_perturbation.weights, rb.final_perturbation.weights);
}

TEST(FairnessProblem, MismatchedPartitionIsRejected) {
  TinyProblem t(FairnessKind::cp, PerturbationKind::deletion, 1, 0.0);
  EXPECT_THROW(FairnessAttackProblem(*t.model, t.problem->adjacency(), t.problem->candidates(),
                                     make_operationalization(FairnessKind::cp, 8, 3),
                                     t.inst.providers, make_evaluation_context(t.inst.split), 0.0),
               ConfigError);
}

}  // namespace
}  // namespace fairrobust
