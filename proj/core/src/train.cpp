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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fairrobust/model.hpp"

namespace fairrobust {

namespace {

std::size_t draw(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(static_cast<double>(rng() >> 11) * 0x1.0p-53 *
                                  static_cast<double>(n)) % n;
}

struct Adam {
  explicit Adam(const Matrix& like)
      : m(Matrix::Zero(like.rows(), like.cols())),
        v(Matrix::Zero(like.rows(), like.cols())) {}

  void step(Matrix& param, const Matrix& grad, double lr) {
    constexpr double b1 = 0.9;
    constexpr double b2 = 0.999;
    constexpr double eps = 1e-8;
    ++t;
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }

  Matrix m;
  Matrix v;
  std::size_t t = 0;
};

ModelParams unstack(const Matrix& nodes, std::size_t num_users) {
  const auto nu = static_cast<Eigen::Index>(num_users);
  ModelParams p;
  p.user_embeddings = nodes.topRows(nu);
  p.item_embeddings = nodes.bottomRows(nodes.rows() - nu);
  return p;
}

double validation_ndcg(const ModelParams& params, const AdjacencyMatrix& normalized,
                       const RecModelConfig& cfg,
                       const std::vector<std::vector<Index>>& train_items,
                       const std::vector<std::vector<Index>>& val_items,
                       const std::vector<Index>& val_users) {
  const Matrix scores = forward_scores(params, normalized, cfg.layers, val_users);
  return mean_ndcg(recommend_topk(scores, val_users, cfg.k_eval, train_items),
                   val_items);
}

}  // namespace

TrainResult bpr_train(const SplitDataset& split, const RecModelConfig& cfg) {
  if (split.train.empty()) throw DataError("empty training split");
  if (split.num_items < 2) {
    throw DataError("BPR needs at least 2 items to sample negatives");
  }
  if (cfg.batch_size == 0 || cfg.negatives == 0 || cfg.k_eval == 0) {
    throw ConfigError("batch_size, negatives and k_eval must be >= 1");
  }

  const std::size_t nu = split.num_users;
  const std::size_t ni = split.num_items;
  const AdjacencyMatrix normalized =
      normalize_adjacency(build_adjacency(split.train, nu, ni));
  const auto train_items = items_by_user(split.train, nu);
  const auto val_items = items_by_user(split.validation, nu);
  std::vector<Index> val_users;
  for (Index u = 0; u < nu; ++u) {
    if (!val_items[u].empty()) val_users.push_back(u);
  }

  std::vector<std::pair<Index, Index>> positives;
  for (Index u = 0; u < nu; ++u) {
    for (Index i : train_items[u]) positives.emplace_back(u, i);
  }
  bool any_negative = false;
  for (Index u = 0; u < nu; ++u) {
    if (!train_items[u].empty() && train_items[u].size() < ni) any_negative = true;
  }
  if (!any_negative) throw DataError("no user has an unobserved item to sample");

  ModelParams init = init_params(nu, ni, cfg, cfg.seed);
  Matrix nodes(static_cast<Eigen::Index>(nu + ni), static_cast<Eigen::Index>(cfg.dim));
  nodes.topRows(static_cast<Eigen::Index>(nu)) = init.user_embeddings;
  nodes.bottomRows(static_cast<Eigen::Index>(ni)) = init.item_embeddings;
  Adam adam(nodes);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  TrainResult result;
  result.params = unstack(nodes, nu);
  double best = -1.0;
  const auto nue = static_cast<Eigen::Index>(nu);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t k = positives.size(); k > 1; --k) {
      std::swap(positives[k - 1], positives[draw(rng, k)]);
    }
    double loss_sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t start = 0; start < positives.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(positives.size(), start + cfg.batch_size);
      // Forward through propagation with the current ego embeddings.
      std::vector<Matrix> layers;
      layers.reserve(cfg.layers + 1);
      layers.push_back(nodes);
      for (std::size_t l = 0; l < cfg.layers; ++l) {
        Matrix next = Matrix::Zero(nodes.rows(), nodes.cols());
        for (const auto& e : normalized.entries()) {
          const auto u = static_cast<Eigen::Index>(e.user);
          const auto i = nue + static_cast<Eigen::Index>(e.item);
          next.row(u).noalias() += e.value * layers.back().row(i);
          next.row(i).noalias() += e.value * layers.back().row(u);
        }
        layers.push_back(std::move(next));
      }
      Matrix final_emb = layers[0];
      for (std::size_t l = 1; l < layers.size(); ++l) final_emb += layers[l];
      final_emb /= static_cast<double>(layers.size());

      Matrix final_grad = Matrix::Zero(nodes.rows(), nodes.cols());
      std::vector<Eigen::Index> touched;
      std::size_t batch_pairs = 0;
      double batch_loss = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        const auto [u, i] = positives[b];
        const auto& seen = train_items[u];
        if (seen.size() >= ni) continue;
        for (std::size_t n = 0; n < cfg.negatives; ++n) {
          Index j = draw(rng, ni);
          while (std::binary_search(seen.begin(), seen.end(), j)) j = draw(rng, ni);
          const auto ur = static_cast<Eigen::Index>(u);
          const auto ir = nue + static_cast<Eigen::Index>(i);
          const auto jr = nue + static_cast<Eigen::Index>(j);
          const double sp = final_emb.row(ur).dot(final_emb.row(ir));
          const double sn = final_emb.row(ur).dot(final_emb.row(jr));
          batch_loss += bpr_pair_loss(sp, sn);
          // d/dx of -ln sigmoid(x) is -sigmoid(-x).
          const double g = -sigmoid(sn - sp);
          final_grad.row(ur) += g * (final_emb.row(ir) - final_emb.row(jr));
          final_grad.row(ir) += g * final_emb.row(ur);
          final_grad.row(jr) -= g * final_emb.row(ur);
          touched.insert(touched.end(), {ur, ir, jr});
          ++batch_pairs;
        }
      }
      if (batch_pairs == 0) continue;
      const double scale = 1.0 / static_cast<double>(batch_pairs);
      final_grad *= scale;
      Matrix grad = propagation_backward(normalized, layers, final_grad, nullptr);
      for (auto row : touched) grad.row(row) += cfg.l2 * scale * nodes.row(row);
      adam.step(nodes, grad, cfg.learning_rate);
      loss_sum += batch_loss;
      pairs += batch_pairs;
    }
    result.report.epoch_loss.push_back(pairs ? loss_sum / static_cast<double>(pairs) : 0.0);

    const ModelParams current = unstack(nodes, nu);
    const double ndcg = val_users.empty()
                            ? 0.0
                            : validation_ndcg(current, normalized, cfg, train_items,
                                              val_items, val_users);
    result.report.validation_ndcg.push_back(ndcg);
    // Without validation users every epoch ties; the latest one is kept.
    if (ndcg > best || val_users.empty()) {
      best = ndcg;
      result.params = current;
      result.report.best_epoch = epoch;
      result.report.best_validation_ndcg = ndcg;
    }
    if (!val_users.empty() && epoch - result.report.best_epoch >= cfg.patience) break;
  }
  return result;
}

}  // namespace fairrobust
