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

#include <map>
#include <memory>
#include <random>

#include <benchmark/benchmark.h>

#include "fairrobust/attack.hpp"

namespace fairrobust {
namespace {

struct Fixture {
  Dataset ds;
  SplitDataset split;
  ModelParams params;
  AdjacencyMatrix adjacency;
  std::vector<Index> users;

  explicit Fixture(std::size_t n_users) {
    SynthSpec spec;
    spec.n_users = n_users;
    spec.n_items = n_users / 2;
    ds = synth_generate(1, spec);
    split = temporal_split(ds);
    RecModelConfig cfg;
    params = init_params(split.num_users, split.num_items, cfg, 1);
    adjacency = build_adjacency(split.train, split.num_users, split.num_items);
    for (Index u = 0; u < split.num_users; ++u) users.push_back(u);
  }
};

const Fixture& fixture(std::size_t n_users) {
  static std::map<std::size_t, std::unique_ptr<Fixture>> cache;
  auto& f = cache[n_users];
  if (!f) f = std::make_unique<Fixture>(n_users);
  return *f;
}

void BM_Propagate(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  const auto normalized = normalize_adjacency(f.adjacency);
  for (auto _ : state) benchmark::DoNotOptimize(propagate(f.params, normalized, 2));
  state.counters["edges"] = static_cast<double>(f.adjacency.entries().size());
}
BENCHMARK(BM_Propagate)->Arg(200)->Arg(800);

void BM_AdjacencyVjp(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  const LightGcn model(f.params, 2);
  const Matrix grad = Matrix::Ones(static_cast<Eigen::Index>(f.users.size()),
                                   static_cast<Eigen::Index>(f.split.num_items));
  for (auto _ : state) benchmark::DoNotOptimize(model.adjacency_vjp(f.adjacency, f.users, grad));
}
BENCHMARK(BM_AdjacencyVjp)->Arg(200)->Arg(800);

void BM_ApproxNdcg(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  std::vector<double> scores(n);
  for (auto& s : scores) s = normal(rng);
  const std::vector<Index> relevant = {1, 5, 9};
  for (auto _ : state) benchmark::DoNotOptimize(approx_ndcg(scores, relevant, 1.0));
}
BENCHMARK(BM_ApproxNdcg)->Arg(100)->Arg(1000)->Arg(4000);

void BM_AttackStep(benchmark::State& state) {
  const auto& f = fixture(200);
  const auto op = static_cast<FairnessKind>(state.range(0));
  const LightGcn model(f.params, 2);
  const auto cands = candidate_edges(f.adjacency, PerturbationKind::deletion);
  const auto& part = stakeholder_of(op) == Stakeholder::consumer
                         ? partition_consumers(f.ds, "gender")
                         : partition_providers_by_popularity(f.split);
  const FairnessAttackProblem problem(model, f.adjacency, cands, make_operationalization(op, f.split.num_items),
                                      part, make_evaluation_context(f.split), 0.01);
  auto p = init_perturbation(cands);
  PerturbationOptimizer opt(OptimizerKind::normalized_momentum, 0.1, cands.size());
  std::size_t epoch = 0;
  for (auto _ : state) benchmark::DoNotOptimize(attack_step(problem, p, opt, ++epoch));
  state.SetLabel(to_string(op));
}
BENCHMARK(BM_AttackStep)
    ->Arg(static_cast<int>(FairnessKind::cp))
    ->Arg(static_cast<int>(FairnessKind::pe))
    ->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace fairrobust

BENCHMARK_MAIN();
