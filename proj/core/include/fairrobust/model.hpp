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

#ifndef FAIRROBUST_MODEL_HPP_
#define FAIRROBUST_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fairrobust/dataset.hpp"
#include "fairrobust/graph.hpp"

namespace fairrobust {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ModelParams {
  Matrix user_embeddings;
  Matrix item_embeddings;

  std::size_t dim() const {
    return static_cast<std::size_t>(user_embeddings.cols());
  }
  std::size_t num_users() const {
    return static_cast<std::size_t>(user_embeddings.rows());
  }
  std::size_t num_items() const {
    return static_cast<std::size_t>(item_embeddings.rows());
  }

  bool operator==(const ModelParams& other) const {
    return user_embeddings == other.user_embeddings &&
           item_embeddings == other.item_embeddings;
  }
};

struct RecModelConfig {
  std::size_t dim = 64;
  std::size_t layers = 2;
  // Adam step size for BPR training.
  double learning_rate = 5e-3;
  // L2 penalty on the ego embeddings of each mini-batch.
  double l2 = 1e-4;
  std::size_t epochs = 100;
  // Stop when validation NDCG has not improved for this many epochs.
  std::size_t patience = 10;
  std::size_t negatives = 1;
  std::size_t batch_size = 256;
  std::uint64_t seed = 42;
  std::size_t k_eval = 10;
};

// Normal(0, 0.1 / sqrt(d)) initialization drawn from `seed`.
ModelParams init_params(std::size_t num_users, std::size_t num_items,
                        const RecModelConfig& cfg, std::uint64_t seed);

// Stacked [users; items] node embeddings after LightGCN propagation:
// E(l+1) = Â E(l), result = mean(E(0) .. E(L)).
Matrix propagate(const ModelParams& params, const AdjacencyMatrix& normalized,
                 std::size_t layers);

// scores(r, i) = <final_users[r], final_items[i]> for the requested users.
Matrix forward_scores(const ModelParams& params,
                      const AdjacencyMatrix& normalized, std::size_t layers,
                      std::span<const Index> users);

// The model contract consumed by the attack. Scores are computed from a raw
// (unnormalized, possibly relaxed) adjacency matrix with the parameters held
// fixed.
class GraphRecommender {
 public:
  virtual ~GraphRecommender() = default;

  virtual std::size_t num_users() const = 0;
  virtual std::size_t num_items() const = 0;

  virtual Matrix scores(const AdjacencyMatrix& adjacency,
                        std::span<const Index> users) const = 0;

  // Vector-Jacobian product: gradient of sum(score_grad .* scores(adjacency))
  // w.r.t. the value of each stored entry of `adjacency` (same order as
  // adjacency.entries()).
  virtual std::vector<double> adjacency_vjp(
      const AdjacencyMatrix& adjacency, std::span<const Index> users,
      const Matrix& score_grad) const = 0;
};

class LightGcn final : public GraphRecommender {
 public:
  LightGcn(ModelParams params, std::size_t layers);

  std::size_t num_users() const override { return params_.num_users(); }
  std::size_t num_items() const override { return params_.num_items(); }
  std::size_t layers() const { return layers_; }
  const ModelParams& params() const { return params_; }

  Matrix scores(const AdjacencyMatrix& adjacency,
                std::span<const Index> users) const override;
  std::vector<double> adjacency_vjp(const AdjacencyMatrix& adjacency,
                                    std::span<const Index> users,
                                    const Matrix& score_grad) const override;

 private:
  ModelParams params_;
  std::size_t layers_;
};

// Backpropagates a gradient on the final node embeddings through the
// propagation layers. Returns the gradient on E(0) and accumulates the
// gradient on each normalized entry value into `entry_grad` when given.
Matrix propagation_backward(const AdjacencyMatrix& normalized,
                            const std::vector<Matrix>& layer_outputs,
                            const Matrix& final_grad,
                            std::vector<double>* entry_grad);

// -ln sigmoid(pos - neg)
double bpr_pair_loss(double positive_score, double negative_score);

struct TrainReport {
  std::vector<double> epoch_loss;
  std::vector<double> validation_ndcg;
  std::size_t best_epoch = 0;
  double best_validation_ndcg = 0.0;
};

struct TrainResult {
  ModelParams params;
  TrainReport report;
};

// BPR training with uniform negative sampling on the train split, keeping the
// parameters with the best validation NDCG@k_eval.
TrainResult bpr_train(const SplitDataset& split, const RecModelConfig& cfg);

struct RecommendationList {
  std::vector<Index> items;
  std::vector<double> scores;
  // Fewer than k eligible items were available.
  bool truncated = false;
};

struct RecommendationLists {
  std::size_t k = 0;
  std::vector<Index> users;
  std::vector<RecommendationList> lists;
};

// Top-k items per user by descending score, ties to the lower item index.
// Items in exclude[user] (sorted) are skipped. Row r of `scores` belongs to
// users[r].
RecommendationLists recommend_topk(
    const Matrix& scores, std::span<const Index> users, std::size_t k,
    const std::vector<std::vector<Index>>& exclude);

// Mean NDCG@k over users with a nonempty `relevant` set.
double mean_ndcg(const RecommendationLists& lists,
                 const std::vector<std::vector<Index>>& relevant);
double mean_precision(const RecommendationLists& lists,
                      const std::vector<std::vector<Index>>& relevant);

// <dir>/embeddings.bin + <dir>/model.json. Loading reproduces the tables bit
// for bit.
void save_checkpoint(const std::filesystem::path& dir,
                     const ModelParams& params, const RecModelConfig& cfg);
struct Checkpoint {
  ModelParams params;
  RecModelConfig config;
};
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace fairrobust

#endif  // FAIRROBUST_MODEL_HPP_
