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
#include <filesystem>
#include <numeric>

#include <gtest/gtest.h>

#include "fairrobust/model.hpp"
#include "support/oracles.hpp"

namespace fairrobust {
namespace {

using testing::make_tiny_instance;

std::vector<Index> all_users(std::size_t n) {
  std::vector<Index> u(n);
  std::iota(u.begin(), u.end(), Index{0});
  return u;
}

// Raw adjacency with non-uniform entry values, as seen by a relaxed attack.
AdjacencyMatrix weighted_adjacency(const SplitDataset& s) {
  std::vector<Edge> edges;
  for (std::size_t k = 0; k < s.train.size(); ++k) {
    edges.push_back({s.train[k].user, s.train[k].item, 0.3 + 0.6 * std::fmod(0.37 * k, 1.0)});
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::pair(a.user, a.item) < std::pair(b.user, b.item);
  });
  return AdjacencyMatrix(s.num_users, s.num_items, edges);
}

class LightGcnOracle : public ::testing::TestWithParam<std::size_t> {};

TEST_P(LightGcnOracle, ScoresMatchDenseComputation) {
  const std::size_t layers = GetParam();
  const auto inst = make_tiny_instance(6, 8, 4);
  RecModelConfig cfg;
  cfg.dim = 4;
  const ModelParams params = init_params(6, 8, cfg, 17);
  const AdjacencyMatrix a = weighted_adjacency(inst.split);
  const LightGcn model(params, layers);
  const Matrix got = model.scores(a, all_users(6));
  const Eigen::MatrixXd want = testing::oracle_lightgcn_scores(params, a.to_dense(), layers);
  EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-13);
}

TEST_P(LightGcnOracle, AdjacencyVjpMatchesDifferences) {
  const std::size_t layers = GetParam();
  const auto inst = make_tiny_instance(6, 8, 5);
  RecModelConfig cfg;
  cfg.dim = 4;
  const ModelParams params = init_params(6, 8, cfg, 23);
  const AdjacencyMatrix a = weighted_adjacency(inst.split);
  const LightGcn model(params, layers);
  const std::vector<Index> users = {0, 2, 5};
  Matrix weight(3, 8);
  for (Eigen::Index r = 0; r < weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < weight.cols(); ++c) weight(r, c) = std::sin(1.0 + r * 8 + c);
  }
  const auto grad = model.adjacency_vjp(a, users, weight);
  ASSERT_EQ(grad.size(), a.num_entries());

  std::vector<double> values;
  for (const auto& e : a.entries()) values.push_back(e.value);
  auto f = [&](const std::vector<double>& v) {
    std::vector<Edge> edges(a.entries().begin(), a.entries().end());
    for (std::size_t k = 0; k < edges.size(); ++k) edges[k].value = v[k];
    const Matrix s = model.scores(AdjacencyMatrix(6, 8, edges), users);
    return (s.array() * weight.array()).sum();
  };
  const auto fd = testing::central_differences(f, values, 1e-6);
  EXPECT_LT(testing::relative_error(grad, fd), 1e-7);
}

INSTANTIATE_TEST_SUITE_P(Layers, LightGcnOracle, ::testing::Values(0, 1, 2, 3));

TEST(LightGcn, InitIsSeededAndFinite) {
  RecModelConfig cfg;
  cfg.dim = 8;
  const auto a = init_params(5, 7, cfg, 1);
  EXPECT_EQ(a, init_params(5, 7, cfg, 1));
  EXPECT_FALSE(a == init_params(5, 7, cfg, 2));
  EXPECT_TRUE(a.user_embeddings.allFinite());
  EXPECT_EQ(a.dim(), 8u);
}

TEST(Bpr, EqualScoresGiveLn2) {
  EXPECT_NEAR(bpr_pair_loss(0.7, 0.7), std::log(2.0), 1e-15);
  EXPECT_LT(bpr_pair_loss(5.0, -5.0), 1e-4);
  EXPECT_TRUE(std::isfinite(bpr_pair_loss(-800.0, 800.0)));
}

TEST(TopK, ExcludesTrainItemsAndBreaksTiesLow) {
  Matrix scores(2, 5);
  scores << 1.0, 3.0, 3.0, 0.5, 2.0,  //
      0.1, 0.1, 0.1, 0.1, 0.1;
  const std::vector<std::vector<Index>> exclude = {{1}, {0, 1, 2, 3}};
  const auto lists = recommend_topk(scores, std::vector<Index>{0, 1}, 3, exclude);
  EXPECT_EQ(lists.lists[0].items, (std::vector<Index>{2, 4, 0}));
  EXPECT_EQ(lists.lists[0].scores, (std::vector<double>{3.0, 2.0, 1.0}));
  EXPECT_FALSE(lists.lists[0].truncated);
  EXPECT_EQ(lists.lists[1].items, std::vector<Index>{4});
  EXPECT_TRUE(lists.lists[1].truncated);
}

TEST(TopK, MeanMetricsSkipUsersWithoutGroundTruth) {
  RecommendationLists lists;
  lists.k = 2;
  lists.users = {0, 1, 2};
  lists.lists = {{{3, 4}, {2, 1}, false}, {{0, 1}, {2, 1}, false}, {{5, 6}, {1, 0}, false}};
  const std::vector<std::vector<Index>> rel = {{4}, {}, {5, 6}};
  const double want = (testing::oracle_ndcg({3, 4}, {4}, 2) + 1.0) / 2.0;
  EXPECT_NEAR(mean_ndcg(lists, rel), want, 1e-15);
  EXPECT_NEAR(mean_precision(lists, rel), (0.5 + 1.0) / 2.0, 1e-15);
}

TEST(Training, DeterministicLossDropsAndBeatsRandom) {
  const Dataset ds = synth_generate(8);
  const SplitDataset split = temporal_split(ds);
  RecModelConfig cfg;
  cfg.epochs = 12;
  cfg.patience = 100;
  const TrainResult a = bpr_train(split, cfg);
  const TrainResult b = bpr_train(split, cfg);
  EXPECT_EQ(a.params, b.params);
  ASSERT_EQ(a.report.epoch_loss.size(), 12u);
  for (std::size_t e = 1; e < 4; ++e) {
    EXPECT_LT(a.report.epoch_loss[e], a.report.epoch_loss[e - 1]) << "epoch " << e;
  }

  const LightGcn model(a.params, cfg.layers);
  const auto users = all_users(split.num_users);
  const auto exclude = items_by_user(split.train, split.num_users);
  const auto test = items_by_user(split.test, split.num_users);
  const auto lists = recommend_topk(
      model.scores(build_adjacency(split.train, split.num_users, split.num_items), users),
      users, 10, exclude);
  // Expected NDCG@10 of a uniform shuffle: each position holds a relevant
  // item with probability |R| / |candidates|.
  double random = 0.0;
  std::size_t counted = 0;
  for (Index u : users) {
    if (test[u].empty()) continue;
    const double n = static_cast<double>(split.num_items - exclude[u].size());
    double dcg = 0.0, idcg = 0.0;
    for (std::size_t p = 1; p <= 10; ++p) dcg += test[u].size() / n * testing::discount(p);
    for (std::size_t p = 1; p <= std::min<std::size_t>(10, test[u].size()); ++p) {
      idcg += testing::discount(p);
    }
    random += dcg / idcg;
    ++counted;
  }
  random /= static_cast<double>(counted);
  EXPECT_GT(mean_ndcg(lists, test), random);
}

TEST(Training, Errors) {
  RecModelConfig cfg;
  SplitDataset empty;
  empty.num_users = 2;
  empty.num_items = 3;
  EXPECT_THROW(bpr_train(empty, cfg), DataError);
  const auto single = testing::make_split(2, 1, {{0, 0}, {1, 0}}, {});
  EXPECT_THROW(bpr_train(single, cfg), DataError);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto dir = std::filesystem::temp_directory_path() / "fairrobust_ckpt_test";
  std::filesystem::remove_all(dir);
  RecModelConfig cfg;
  cfg.dim = 5;
  cfg.layers = 3;
  cfg.learning_rate = 0.1 / 3.0;
  const ModelParams p = init_params(4, 6, cfg, 99);
  save_checkpoint(dir, p, cfg);
  const Checkpoint c = load_checkpoint(dir);
  EXPECT_EQ(c.params, p);
  EXPECT_EQ(c.config.layers, 3u);
  EXPECT_EQ(c.config.learning_rate, cfg.learning_rate);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(load_checkpoint(dir), DataError);
}

}  // namespace
}  // namespace fairrobust
