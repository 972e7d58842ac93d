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
#include <sstream>

#include <gtest/gtest.h>

#include "fairrobust/graph.hpp"
#include "support/oracles.hpp"

namespace fairrobust {
namespace {

using testing::dense_bipartite;
using testing::make_split;

SplitDataset small_split() {
  return make_split(3, 4, {{0, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 3}}, {});
}

TEST(Adjacency, BuildsSymmetricSortedMatrix) {
  const auto a = build_adjacency(small_split().train, 3, 4);
  EXPECT_EQ(a.num_nodes(), 7u);
  EXPECT_EQ(a.num_entries(), 5u);
  const Eigen::MatrixXd d = a.to_dense();
  EXPECT_TRUE(d.isApprox(d.transpose()));
  EXPECT_EQ(d(0, 3), 1.0);
  EXPECT_EQ(d(4, 1), 1.0);
  EXPECT_EQ(a.value(2, 0), 0.0);
  EXPECT_FALSE(a.find(2, 0).has_value());
  const auto deg = a.degrees();
  EXPECT_EQ(deg, (std::vector<double>{2, 2, 1, 1, 2, 1, 1}));
}

TEST(Adjacency, RejectsOutOfRangeAndDuplicates) {
  EXPECT_THROW(AdjacencyMatrix(2, 2, {{0, 2, 1.0}}), DataError);
  EXPECT_THROW(AdjacencyMatrix(2, 2, {{0, 1, 1.0}, {0, 1, 1.0}}), DataError);
}

TEST(Adjacency, NormalizationMatchesDenseFormula) {
  const auto a = build_adjacency(small_split().train, 3, 4);
  const Eigen::MatrixXd dense = a.to_dense();
  const Eigen::VectorXd deg = dense.rowwise().sum();
  const Eigen::MatrixXd expected =
      deg.cwiseSqrt().cwiseInverse().asDiagonal() * dense * deg.cwiseSqrt().cwiseInverse().asDiagonal();
  EXPECT_TRUE(normalize_adjacency(a).to_dense().isApprox(expected, 1e-15));
}

TEST(Adjacency, ZeroDegreeNodesGiveZeroRows) {
  // User 2 and item 3 have no edges.
  const AdjacencyMatrix a(3, 4, {{0, 0, 1.0}, {1, 0, 0.5}});
  const Eigen::MatrixXd n = normalize_adjacency(a).to_dense();
  EXPECT_TRUE(n.allFinite());
  EXPECT_EQ(n.row(2).norm(), 0.0);
  EXPECT_EQ(n.row(6).norm(), 0.0);
  EXPECT_DOUBLE_EQ(n(1, 3), 0.5 / std::sqrt(0.5 * 1.5));
}

TEST(Adjacency, CooListsBothTriangles) {
  const AdjacencyMatrix a(1, 2, {{0, 1, 0.25}});
  std::ostringstream out;
  a.write_coo(out);
  EXPECT_EQ(out.str(), "0 2 0.25\n2 0 0.25\n");
}

TEST(Candidates, DeletionIsTrainEdgeSet) {
  const auto a = build_adjacency(small_split().train, 3, 4);
  const auto c = candidate_edges(a, PerturbationKind::deletion);
  ASSERT_EQ(c.size(), 5u);
  for (std::size_t j = 0; j < c.size(); ++j) EXPECT_EQ(a.value(c[j].first, c[j].second), 1.0);
  EXPECT_EQ(c.position(1, 2), std::optional<std::size_t>(3));
  EXPECT_FALSE(c.position(2, 0).has_value());
}

TEST(Candidates, AdditionIsComplementAndCapIsSeeded) {
  const auto a = build_adjacency(small_split().train, 3, 4);
  const auto all = candidate_edges(a, PerturbationKind::addition);
  EXPECT_EQ(all.size(), 12u - 5u);
  for (const auto& [u, i] : all.edges()) EXPECT_EQ(a.value(u, i), 0.0);
  const auto c1 = candidate_edges(a, PerturbationKind::addition, 4, 9);
  const auto c2 = candidate_edges(a, PerturbationKind::addition, 4, 9);
  EXPECT_EQ(c1.size(), 4u);
  EXPECT_EQ(c1.edges(), c2.edges());
  EXPECT_TRUE(std::is_sorted(c1.edges().begin(), c1.edges().end()));
  EXPECT_EQ(candidate_edges(a, PerturbationKind::addition, 100, 9).size(), 7u);
}

TEST(Perturbation, InitialWeightsLeaveGraphUnchanged) {
  const auto a = build_adjacency(small_split().train, 3, 4);
  for (auto kind : {PerturbationKind::deletion, PerturbationKind::addition}) {
    const auto c = candidate_edges(a, kind);
    for (double m : {0.0, 0.1, 3.0}) {
      const auto p = init_perturbation(c, m);
      const auto mask = binarize(p);
      EXPECT_EQ(apply_perturbation(a, c, mask), a);
      EXPECT_EQ(count_perturbed(c, mask), 0u);
    }
  }
}

TEST(Perturbation, BinarizeThresholdAndNonFinite) {
  PerturbationVector p{PerturbationKind::deletion, {-1e-300, 0.0, 2.0, -2.0}};
  EXPECT_EQ(binarize(p), (std::vector<std::uint8_t>{0, 1, 1, 0}));
  p.weights.push_back(std::nan(""));
  EXPECT_THROW(binarize(p), NumericError);
}

TEST(Perturbation, BudgetedBinarizeKeepsDeepestFlips) {
  PerturbationVector del{PerturbationKind::deletion, {-0.2, 0.3, -0.5, -0.2, 0.0}};
  EXPECT_EQ(binarize(del, 10), binarize(del));
  EXPECT_EQ(binarize(del, 2), (std::vector<std::uint8_t>{0, 1, 0, 1, 1}));
  EXPECT_EQ(binarize(del, 0), (std::vector<std::uint8_t>{1, 1, 1, 1, 1}));
  PerturbationVector add{PerturbationKind::addition, {0.1, -0.3, 0.4, 0.0}};
  EXPECT_EQ(binarize(add, 1), (std::vector<std::uint8_t>{0, 0, 1, 0}));
  EXPECT_EQ(binarize(add, 2), (std::vector<std::uint8_t>{1, 0, 1, 0}));
}

TEST(Perturbation, FlipsAreCountedAndApplied) {
  const auto a = build_adjacency(small_split().train, 3, 4);
  const auto del = candidate_edges(a, PerturbationKind::deletion);
  const std::vector<std::uint8_t> mask = {1, 0, 1, 0, 0};
  const auto deleted = apply_perturbation(a, del, mask);
  EXPECT_EQ(deleted.num_entries(), 2u);
  EXPECT_EQ(count_perturbed(del, mask), 3u);
  const std::vector<double> values(mask.begin(), mask.end());
  EXPECT_EQ(perturbation_distance(a, del, values), 3.0);

  const auto add = candidate_edges(a, PerturbationKind::addition);
  std::vector<std::uint8_t> add_mask(add.size(), 0);
  add_mask[0] = 1;
  const auto added = apply_perturbation(a, add, add_mask);
  EXPECT_EQ(added.num_entries(), 6u);
  EXPECT_EQ(added.value(add[0].first, add[0].second), 1.0);
}

TEST(Perturbation, RelaxedDistanceGradientMatchesDifferences) {
  const auto a = build_adjacency(small_split().train, 3, 4);
  for (auto kind : {PerturbationKind::deletion, PerturbationKind::addition}) {
    const auto c = candidate_edges(a, kind);
    PerturbationVector p{kind, {}};
    for (std::size_t j = 0; j < c.size(); ++j) p.weights.push_back(0.3 * j - 0.8);
    const Distance d = perturbation_distance(a, c, p);
    auto f = [&](const std::vector<double>& w) {
      return perturbation_distance(a, c, PerturbationVector{kind, w}).value;
    };
    const auto fd = testing::central_differences(f, p.weights, 1e-6);
    EXPECT_LT(testing::relative_error(d.gradient, fd), 1e-8);
    EXPECT_NEAR(d.value, perturbation_distance(a, c, relax(p)), 1e-15);
  }
}

TEST(Perturbation, RelaxedValuesMatchDenseSubstitution) {
  const auto split = small_split();
  const auto a = build_adjacency(split.train, 3, 4);
  const auto c = candidate_edges(a, PerturbationKind::deletion);
  const std::vector<double> v = {0.9, 0.2, 0.0, 1.0, 0.5};
  std::vector<Edge> edges;
  for (std::size_t j = 0; j < c.size(); ++j) edges.push_back({c[j].first, c[j].second, v[j]});
  EXPECT_TRUE(apply_perturbation(a, c, v).to_dense().isApprox(dense_bipartite(3, 4, edges)));
}

TEST(Perturbation, KindNames) {
  EXPECT_STREQ(to_string(PerturbationKind::addition), "add");
  EXPECT_EQ(perturbation_kind_from_string("del"), PerturbationKind::deletion);
  EXPECT_THROW(perturbation_kind_from_string("swap"), ConfigError);
}

}  // namespace
}  // namespace fairrobust
