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

// Acceptance runner: one PASS/FAIL line per criterion. Exit status is nonzero
// when any gating criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "fairrobust/report.hpp"
#include "fairrobust_cli/commands.hpp"
#include "fairrobust_cli/run_config.hpp"
#include "support/oracles.hpp"

namespace fr = fairrobust;
namespace fs = std::filesystem;
using fr::Index;

namespace {

constexpr double kGradientTolerance = 1e-4;
constexpr double kGradientStep = 1e-5;
constexpr double kOracleTolerance = 1e-12;
constexpr double kMinRelativeDelta = 0.5;
constexpr double kLargeLambda = 10.0;
constexpr double kMl1mNdcgLow = 0.09;
constexpr double kMl1mNdcgHigh = 0.16;

struct Outcome {
  bool pass = false;
  std::string detail;
  bool skipped = false;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

fr::RecommendationLists make_lists(const std::vector<std::vector<Index>>& items,
                                   std::size_t k) {
  fr::RecommendationLists out;
  out.k = k;
  for (Index u = 0; u < items.size(); ++u) {
    out.users.push_back(u);
    out.lists.push_back({items[u], std::vector<double>(items[u].size(), 0.0), false});
  }
  return out;
}

struct Problem {
  fr::testing::TinyInstance inst;
  std::unique_ptr<fr::LightGcn> model;
  std::unique_ptr<fr::FairnessAttackProblem> problem;
};

Problem tiny_problem(fr::FairnessKind op, fr::PerturbationKind kind, std::size_t users,
                     std::size_t items, std::size_t layers, double lambda, std::uint64_t seed,
                     bool trained) {
  Problem t;
  t.inst = fr::testing::make_tiny_instance(users, items, seed);
  fr::RecModelConfig cfg;
  cfg.dim = 4;
  cfg.seed = seed;
  cfg.epochs = 30;
  cfg.batch_size = 8;
  cfg.learning_rate = 0.05;
  cfg.k_eval = 3;
  fr::ModelParams params = trained ? fr::bpr_train(t.inst.split, cfg).params
                                   : fr::init_params(users, items, cfg, seed + 100);
  t.model = std::make_unique<fr::LightGcn>(std::move(params), layers);
  auto adjacency = fr::build_adjacency(t.inst.split.train, users, items);
  auto cands = fr::candidate_edges(adjacency, kind);
  const auto& part = fr::stakeholder_of(op) == fr::Stakeholder::consumer ? t.inst.consumers
                                                                         : t.inst.providers;
  t.problem = std::make_unique<fr::FairnessAttackProblem>(
      *t.model, adjacency, cands, fr::make_operationalization(op, items, 3), part,
      fr::make_evaluation_context(t.inst.split), lambda);
  return t;
}

const fr::FairnessKind kOps[] = {fr::FairnessKind::cp, fr::FairnessKind::cs,
                                 fr::FairnessKind::pe, fr::FairnessKind::pv};
const fr::PerturbationKind kKinds[] = {fr::PerturbationKind::deletion,
                                       fr::PerturbationKind::addition};

Outcome identity() {
  std::size_t checked = 0;
  for (auto op : kOps) {
    for (auto kind : kKinds) {
      auto t = tiny_problem(op, kind, 6, 8, 2, 0.01, 3, false);
      const auto mask = fr::binarize(fr::init_perturbation(t.problem->candidates()));
      const bool same = fr::apply_perturbation(t.problem->adjacency(), t.problem->candidates(),
                                               mask) == t.problem->adjacency();
      const auto e = t.problem->exact(mask);
      if (!same || e.n_perturbed != 0 ||
          fr::delta(e.dp, t.problem->original_dp()) != 0.0) {
        return {false, std::string("mismatch for ") + fr::to_string(op) + "/" +
                           fr::to_string(kind)};
      }
      ++checked;
    }
  }
  return {true, std::to_string(checked) + " op/kind pairs exact"};
}

Outcome gradients() {
  double worst = 0.0;
  for (auto op : kOps) {
    for (auto kind : kKinds) {
      for (std::size_t layers : {1u, 2u}) {
        for (double lambda : {0.0, 0.01}) {
          auto t = tiny_problem(op, kind, 6, 8, layers, lambda, 3, false);
          std::vector<double> w;
          for (std::size_t j = 0; j < t.problem->num_candidates(); ++j) {
            w.push_back(std::sin(1.7 * static_cast<double>(j) + 0.3));
          }
          const auto s = t.problem->surrogate({kind, w});
          auto f = [&](const std::vector<double>& x) {
            return t.problem->surrogate({kind, x}).objective;
          };
          worst = std::max(worst, fr::testing::relative_error(
                                      s.gradient, fr::testing::central_differences(
                                                      f, w, kGradientStep)));
        }
      }
    }
  }
  return {worst < kGradientTolerance, fmt("max relative error %.3g over 32 cases", worst)};
}

Outcome metric_oracles() {
  std::mt19937_64 rng(2026);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n_items = 5 + rng() % 20;
    const std::size_t k = 1 + rng() % 5;
    std::vector<Index> items(n_items);
    std::iota(items.begin(), items.end(), Index{0});
    std::vector<std::vector<Index>> lists(1 + rng() % 6);
    for (auto& l : lists) {
      std::shuffle(items.begin(), items.end(), rng);
      l.assign(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(k));
    }
    std::shuffle(items.begin(), items.end(), rng);
    std::vector<Index> group(items.begin(), items.begin() + 1 + rng() % (n_items - 1));
    std::sort(group.begin(), group.end());
    const auto rl = make_lists(lists, k);
    auto track = [&](double a, double b) { worst = std::max(worst, std::abs(a - b)); };
    track(fr::exposure(rl, group, n_items), fr::testing::oracle_exposure(lists, group, n_items));
    track(fr::visibility(rl, group, n_items),
          fr::testing::oracle_visibility(lists, group, n_items, k));
    track(fr::ndcg_at_k(lists[0], group, k), fr::testing::oracle_ndcg(lists[0], group, k));
    track(fr::precision_at_k(lists[0], group, k),
          fr::testing::oracle_precision(lists[0], group, k));
    const double a = std::uniform_real_distribution<double>(0.0, 5.0)(rng);
    const double b = std::uniform_real_distribution<double>(0.0, 5.0)(rng);
    track(fr::demographic_parity(a, b), fr::testing::oracle_dp(a, b));

    const std::size_t nu = 2 + rng() % 8;
    std::vector<std::uint8_t> m(nu);
    std::vector<int> group_of(nu);
    for (std::size_t z = 0; z < nu; ++z) group_of[z] = m[z] = z < 2 ? z : rng() % 2;
    const auto part = fr::testing::make_partition(fr::Stakeholder::consumer, m);
    std::vector<std::pair<Index, Index>> edges(1 + rng() % 10);
    for (auto& e : edges) e = {rng() % nu, rng() % n_items};
    const auto ei = fr::edge_impact(edges, part, 0);
    const double o1 = fr::testing::oracle_ei(edges, group_of, 0, true);
    const double o2 = fr::testing::oracle_ei(edges, group_of, 1, true);
    track(ei.ei_advantaged, o1);
    track(ei.ei_disadvantaged, o2);
    track(ei.delta_ei, o1 - o2);
  }
  return {worst <= kOracleTolerance, fmt("max abs difference %.3g over 1000 instances", worst)};
}

Outcome saturation() {
  std::vector<Index> head(10);
  std::iota(head.begin(), head.end(), Index{0});
  const auto rl = make_lists(std::vector<std::vector<Index>>(9, {2, 7, 0, 5, 9}), 5);
  const double e = fr::exposure(rl, head, 50);
  const double v = fr::visibility(rl, head, 50);
  const bool ok = std::abs(e - 5.0) <= kOracleTolerance && std::abs(v - 5.0) <= kOracleTolerance;
  return {ok, fmt("exposure %.17g visibility %.17g (bound 5)", e, v)};
}

struct SynthRun {
  fr::AttackSetup setup;
  fr::RobustnessReport report;
};

Outcome directional(std::vector<fr::EdgeImpact>& impacts) {
  const fr::cli::RunConfig rc = fr::cli::default_run_config();
  const fr::Dataset ds = fr::synth_generate(rc.seed, rc.data.synth);
  const fr::SplitDataset split = fr::temporal_split(ds, rc.split);
  const auto trained = fr::bpr_train(split, fr::cli::model_config(rc));
  const fr::LightGcn model(trained.params, rc.model.layers);

  fr::AttackConfig cfg = fr::cli::attack_config(rc);
  cfg.operationalization = fr::FairnessKind::cp;
  cfg.kind = fr::PerturbationKind::deletion;
  const auto base = fr::run_attack(split, ds, model, cfg);
  const auto report = fr::build_report(base.result, cfg, base.problem->num_candidates());

  fr::AttackConfig heavy = cfg;
  heavy.lambda = kLargeLambda;
  const auto penalized = fr::run_attack(split, ds, model, heavy);
  const std::size_t n_heavy =
      penalized.result.best ? penalized.result.logs[*penalized.result.best].n_perturbed : 0;

  if (base.result.best) {
    auto edges = fr::perturbed_edge_list(base.result, base.problem->candidates());
    auto part = fr::partition_consumers(ds, cfg.consumer_attribute);
    impacts.push_back(fr::edge_impact(edges, part, 0));
    impacts.push_back(fr::edge_impact(edges, fr::partition_providers_by_popularity(split), 0));
  }
  const bool ok = report.effective && report.delta > 0.0 && !report.relative.undefined &&
                  report.relative.value >= kMinRelativeDelta &&
                  base.result.logs.size() <= 200 && n_heavy < report.n_perturbed_best;
  std::ostringstream s;
  s << "delta " << report.delta << " relative " << report.relative.value * 100.0
    << "% over " << base.result.logs.size() << " epochs, n_best " << report.n_perturbed_best
    << " vs " << n_heavy << " at lambda " << kLargeLambda;
  return {ok, s.str()};
}

Outcome exhaustive() {
  std::ostringstream s;
  bool ok = true;
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    auto t = tiny_problem(fr::FairnessKind::cp, fr::PerturbationKind::deletion, 5, 6, 2, 0.01,
                          seed, true);
    const std::size_t n = t.problem->num_candidates();
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<std::uint8_t> mask(n, 1);
      mask[j] = 0;
      mean += fr::delta(t.problem->exact(mask).dp, t.problem->original_dp());
    }
    mean /= static_cast<double>(n);
    fr::AttackConfig cfg;
    cfg.gamma = 1;
    const auto r = fr::run_attack(*t.problem, cfg);
    const double d = r.best ? r.logs[*r.best].delta : 0.0;
    ok = ok && d >= mean;
    s << "seed " << seed << ": " << d << " vs mean " << mean << "; ";
  }
  return {ok, s.str()};
}

class ScriptedProblem final : public fr::AttackProblem {
 public:
  ScriptedProblem(std::function<double(std::size_t)> dp) : dp_(std::move(dp)) {}
  fr::PerturbationKind kind() const override { return fr::PerturbationKind::deletion; }
  std::size_t num_candidates() const override { return 4; }
  double original_dp() const override { return 0.1; }
  fr::SurrogateEvaluation surrogate(const fr::PerturbationVector&) const override {
    return {0.0, 0.0, 0.0, std::vector<double>(4, 1.0)};
  }
  fr::ExactEvaluation exact(std::span<const std::uint8_t>) const override {
    return {dp_(calls_++), 1};
  }

 private:
  std::function<double(std::size_t)> dp_;
  mutable std::size_t calls_ = 0;
};

Outcome protocol() {
  const fr::AttackConfig cfg;
  const auto flat = fr::run_attack(ScriptedProblem([](std::size_t) { return 0.3; }), cfg);
  const auto rising = fr::run_attack(
      ScriptedProblem([](std::size_t t) { return 0.1 + 0.01 * static_cast<double>(t); }), cfg);
  const bool ok = flat.logs.size() == cfg.patience + 1 && flat.early_stopped &&
                  rising.logs.size() == cfg.max_epochs && !rising.early_stopped;
  return {ok, "constant stops after " + std::to_string(flat.logs.size()) +
                  " epochs, increasing runs " + std::to_string(rising.logs.size())};
}

Outcome ei_accounting(const std::vector<fr::EdgeImpact>& run_impacts) {
  std::vector<std::uint8_t> m(10, 1);
  for (Index u = 0; u < 4; ++u) m[u] = 0;
  const auto hand = fr::edge_impact({{0, 1}, {1, 2}, {2, 0}, {3, 5}, {7, 1}},
                                    fr::testing::make_partition(fr::Stakeholder::consumer, m), 0);
  double worst = std::abs(hand.ei_advantaged - 2.0);
  for (const auto& ei : run_impacts) {
    const double total =
        static_cast<double>(ei.group_size_advantaged + ei.group_size_disadvantaged);
    const double mean = ei.ei_advantaged * ei.group_size_advantaged / total +
                        ei.ei_disadvantaged * ei.group_size_disadvantaged / total;
    worst = std::max(worst, std::abs(mean - 1.0));
  }
  const bool ok = worst <= kOracleTolerance && !run_impacts.empty();
  return {ok, "hand EI " + fmt("%.17g", hand.ei_advantaged) + ", " +
                  std::to_string(run_impacts.size()) + " run attributions, max deviation " +
                  fmt("%.3g", worst)};
}

Outcome determinism() {
  fr::cli::RunConfig cfg = fr::cli::parse_run_config(
      "synth.users = 60\nsynth.items = 40\nmodel.dim = 16\nmodel.epochs = 10\nattack.epochs = 30\n");
  cfg.out = fs::temp_directory_path() / "fairrobust_acceptance_determinism";
  fs::remove_all(cfg.out);
  std::ostringstream log;
  fr::cli::cmd_prepare(cfg, log);
  fr::cli::cmd_train(cfg, log);
  const auto a = fr::cli::cmd_attack(cfg, log);
  const std::string it = fr::read_file(a.run_dir / "iterations.csv");
  const std::string res = fr::read_file(a.run_dir / "result.json");
  const auto b = fr::cli::cmd_attack(cfg, log);
  const bool ok = it == fr::read_file(b.run_dir / "iterations.csv") &&
                  res == fr::read_file(b.run_dir / "result.json");
  fs::remove_all(cfg.out);
  return {ok, std::to_string(it.size() + res.size()) + " bytes compared"};
}

Outcome ml1m() {
  const char* path = std::getenv("FAIRROBUST_ML1M_CONFIG");
  if (path == nullptr) return {true, "set FAIRROBUST_ML1M_CONFIG to a run config", true};
  const fr::cli::RunConfig cfg = fr::cli::load_run_config(path);
  std::ostringstream log;
  fr::cli::cmd_prepare(cfg, log);
  const auto s = fr::cli::cmd_train(cfg, log);
  return {s.test.ndcg >= kMl1mNdcgLow && s.test.ndcg <= kMl1mNdcgHigh,
          fmt("test N@10 %.4f (window [%.2f, %.2f])", s.test.ndcg, kMl1mNdcgLow, kMl1mNdcgHigh)};
}

}  // namespace

int main() {
  std::vector<fr::EdgeImpact> impacts;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"identity_perturbation", identity},
      {"gradient_correctness", gradients},
      {"metric_oracles", metric_oracles},
      {"saturation_bounds", saturation},
      {"directional_attack_efficacy", [&] { return directional(impacts); }},
      {"exhaustive_oracle_dominance", exhaustive},
      {"protocol_fidelity", protocol},
      {"ei_accounting", [&] { return ei_accounting(impacts); }},
      {"determinism", determinism},
      {"ml1m_real_data", ml1m},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* verdict = o.skipped ? "SKIP" : (o.pass ? "PASS" : "FAIL");
    std::printf("%s %s (%.2fs): %s\n", verdict, name.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
    failures += (!o.pass && !o.skipped) ? 1 : 0;
  }
  return failures == 0 ? 0 : 1;
}
