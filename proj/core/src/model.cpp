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

#include "fairrobust/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fairrobust/fairmetrics.hpp"

namespace fairrobust {

namespace {

// out = Â * in over the symmetric user-item structure.
void spmm(const AdjacencyMatrix& normalized, const Matrix& in, Matrix& out) {
  out.setZero(in.rows(), in.cols());
  const auto nu = static_cast<Eigen::Index>(normalized.num_users());
  for (const auto& e : normalized.entries()) {
    const auto u = static_cast<Eigen::Index>(e.user);
    const auto i = nu + static_cast<Eigen::Index>(e.item);
    out.row(u).noalias() += e.value * in.row(i);
    out.row(i).noalias() += e.value * in.row(u);
  }
}

Matrix stack(const ModelParams& params) {
  Matrix e(params.user_embeddings.rows() + params.item_embeddings.rows(),
           params.user_embeddings.cols());
  e.topRows(params.user_embeddings.rows()) = params.user_embeddings;
  e.bottomRows(params.item_embeddings.rows()) = params.item_embeddings;
  return e;
}

void check_dims(const ModelParams& params, const AdjacencyMatrix& adjacency) {
  if (params.num_users() != adjacency.num_users() ||
      params.num_items() != adjacency.num_items()) {
    throw DataError("adjacency is " + std::to_string(adjacency.num_users()) + "x" +
                    std::to_string(adjacency.num_items()) + ", model expects " +
                    std::to_string(params.num_users()) + "x" +
                    std::to_string(params.num_items()));
  }
}

std::vector<Matrix> propagate_layers(const ModelParams& params,
                                     const AdjacencyMatrix& normalized,
                                     std::size_t layers) {
  std::vector<Matrix> out;
  out.reserve(layers + 1);
  out.push_back(stack(params));
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix next;
    spmm(normalized, out.back(), next);
    out.push_back(std::move(next));
  }
  return out;
}

Matrix layer_mean(const std::vector<Matrix>& layers) {
  Matrix sum = layers.front();
  for (std::size_t l = 1; l < layers.size(); ++l) sum += layers[l];
  return sum / static_cast<double>(layers.size());
}

Matrix gather_rows(const Matrix& m, std::span<const Index> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(rows[r]));
  }
  return out;
}

}  // namespace

ModelParams init_params(std::size_t num_users, std::size_t num_items,
                        const RecModelConfig& cfg, std::uint64_t seed) {
  if (cfg.dim == 0) throw ConfigError("embedding dimension must be >= 1");
  std::mt19937_64 rng(seed);
  const double scale = 0.1 / std::sqrt(static_cast<double>(cfg.dim));
  // Box-Muller on raw 53-bit uniforms keeps the draw independent of the
  // standard library's normal_distribution.
  auto uniform = [&rng] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  auto fill = [&](Matrix& m, std::size_t rows) {
    m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cfg.dim));
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      const double r = std::sqrt(-2.0 * std::log(uniform()));
      m.data()[k] = scale * r * std::cos(2.0 * M_PI * uniform());
    }
  };
  ModelParams params;
  fill(params.user_embeddings, num_users);
  fill(params.item_embeddings, num_items);
  return params;
}

Matrix propagate(const ModelParams& params, const AdjacencyMatrix& normalized,
                 std::size_t layers) {
  check_dims(params, normalized);
  return layer_mean(propagate_layers(params, normalized, layers));
}

Matrix forward_scores(const ModelParams& params, const AdjacencyMatrix& normalized,
                      std::size_t layers, std::span<const Index> users) {
  const Matrix final_emb = propagate(params, normalized, layers);
  const auto nu = static_cast<Eigen::Index>(params.num_users());
  for (Index u : users) {
    if (u >= params.num_users()) throw DataError("user index out of range");
  }
  const Matrix selected = gather_rows(final_emb, users);
  return selected * final_emb.bottomRows(final_emb.rows() - nu).transpose();
}

Matrix propagation_backward(const AdjacencyMatrix& normalized,
                            const std::vector<Matrix>& layer_outputs,
                            const Matrix& final_grad,
                            std::vector<double>* entry_grad) {
  const std::size_t layers = layer_outputs.size() - 1;
  const double inv = 1.0 / static_cast<double>(layers + 1);
  const auto nu = static_cast<Eigen::Index>(normalized.num_users());
  const auto entries = normalized.entries();
  if (entry_grad) entry_grad->assign(entries.size(), 0.0);

  // grad w.r.t. E(l) accumulates the direct 1/(L+1) term plus Â^T times the
  // grad w.r.t. E(l+1).
  Matrix upstream = final_grad * inv;
  Matrix next;
  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& input = layer_outputs[l];
    if (entry_grad) {
      for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto u = static_cast<Eigen::Index>(entries[k].user);
        const auto i = nu + static_cast<Eigen::Index>(entries[k].item);
        (*entry_grad)[k] += upstream.row(u).dot(input.row(i)) +
                            upstream.row(i).dot(input.row(u));
      }
    }
    spmm(normalized, upstream, next);
    next += final_grad * inv;
    upstream.swap(next);
  }
  return upstream;
}

LightGcn::LightGcn(ModelParams params, std::size_t layers)
    : params_(std::move(params)), layers_(layers) {}

Matrix LightGcn::scores(const AdjacencyMatrix& adjacency,
                        std::span<const Index> users) const {
  check_dims(params_, adjacency);
  return forward_scores(params_, normalize_adjacency(adjacency), layers_, users);
}

std::vector<double> LightGcn::adjacency_vjp(const AdjacencyMatrix& adjacency,
                                            std::span<const Index> users,
                                            const Matrix& score_grad) const {
  check_dims(params_, adjacency);
  if (static_cast<std::size_t>(score_grad.rows()) != users.size() ||
      static_cast<std::size_t>(score_grad.cols()) != params_.num_items()) {
    throw DataError("score gradient shape does not match users x items");
  }
  const AdjacencyMatrix normalized = normalize_adjacency(adjacency);
  const auto layer_outputs = propagate_layers(params_, normalized, layers_);
  const Matrix final_emb = layer_mean(layer_outputs);
  const auto nu = static_cast<Eigen::Index>(params_.num_users());
  const auto ni = static_cast<Eigen::Index>(params_.num_items());

  Matrix final_grad = Matrix::Zero(final_emb.rows(), final_emb.cols());
  const Matrix user_part = score_grad * final_emb.bottomRows(ni);
  for (std::size_t r = 0; r < users.size(); ++r) {
    final_grad.row(static_cast<Eigen::Index>(users[r])) +=
        user_part.row(static_cast<Eigen::Index>(r));
  }
  final_grad.bottomRows(ni).noalias() +=
      score_grad.transpose() * gather_rows(final_emb, users);

  std::vector<double> normalized_grad;
  propagation_backward(normalized, layer_outputs, final_grad, &normalized_grad);

  // Chain rule through n_e = w_e / sqrt(d_u d_i) with d = weighted degrees.
  const auto deg = adjacency.degrees();
  const auto raw = adjacency.entries();
  const auto norm = normalized.entries();
  std::vector<double> degree_grad(deg.size(), 0.0);
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const std::size_t u = raw[k].user;
    const std::size_t i = static_cast<std::size_t>(nu) + raw[k].item;
    const double term = -0.5 * normalized_grad[k] * norm[k].value;
    if (deg[u] > 0.0) degree_grad[u] += term / deg[u];
    if (deg[i] > 0.0) degree_grad[i] += term / deg[i];
  }
  std::vector<double> out(raw.size(), 0.0);
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const std::size_t u = raw[k].user;
    const std::size_t i = static_cast<std::size_t>(nu) + raw[k].item;
    if (deg[u] <= 0.0 || deg[i] <= 0.0) continue;
    out[k] = normalized_grad[k] / std::sqrt(deg[u] * deg[i]) + degree_grad[u] +
             degree_grad[i];
  }
  return out;
}

double bpr_pair_loss(double positive_score, double negative_score) {
  const double x = positive_score - negative_score;
  // -ln sigmoid(x) = ln(1 + e^{-x}), evaluated without overflow.
  return x >= 0.0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

RecommendationLists recommend_topk(const Matrix& scores,
                                   std::span<const Index> users, std::size_t k,
                                   const std::vector<std::vector<Index>>& exclude) {
  if (k == 0) throw ConfigError("k must be >= 1");
  if (static_cast<std::size_t>(scores.rows()) != users.size()) {
    throw DataError("score rows do not match user list");
  }
  const auto n_items = static_cast<std::size_t>(scores.cols());
  RecommendationLists out;
  out.k = k;
  out.users.assign(users.begin(), users.end());
  out.lists.resize(users.size());
  std::vector<Index> candidates;
  for (std::size_t r = 0; r < users.size(); ++r) {
    const auto row = scores.row(static_cast<Eigen::Index>(r));
    candidates.clear();
    const std::vector<Index>* skip =
        users[r] < exclude.size() ? &exclude[users[r]] : nullptr;
    std::size_t s = 0;
    for (Index i = 0; i < n_items; ++i) {
      if (skip) {
        while (s < skip->size() && (*skip)[s] < i) ++s;
        if (s < skip->size() && (*skip)[s] == i) continue;
      }
      candidates.push_back(i);
    }
    const std::size_t take = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(),
                      candidates.begin() + static_cast<std::ptrdiff_t>(take),
                      candidates.end(), [&](Index a, Index b) {
                        const double sa = row(static_cast<Eigen::Index>(a));
                        const double sb = row(static_cast<Eigen::Index>(b));
                        return sa != sb ? sa > sb : a < b;
                      });
    auto& list = out.lists[r];
    list.items.assign(candidates.begin(),
                      candidates.begin() + static_cast<std::ptrdiff_t>(take));
    for (Index i : list.items) list.scores.push_back(row(static_cast<Eigen::Index>(i)));
    list.truncated = take < k;
  }
  return out;
}

namespace {

template <typename Metric>
double mean_over_users(const RecommendationLists& lists,
                       const std::vector<std::vector<Index>>& relevant,
                       Metric metric) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < lists.users.size(); ++r) {
    const Index u = lists.users[r];
    if (u >= relevant.size() || relevant[u].empty()) continue;
    sum += metric(lists.lists[r].items, relevant[u], lists.k);
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

}  // namespace

double mean_ndcg(const RecommendationLists& lists,
                 const std::vector<std::vector<Index>>& relevant) {
  return mean_over_users(lists, relevant,
                         [](const auto& l, const auto& rel, std::size_t k) {
                           return ndcg_at_k(l, rel, k);
                         });
}

double mean_precision(const RecommendationLists& lists,
                      const std::vector<std::vector<Index>>& relevant) {
  return mean_over_users(lists, relevant,
                         [](const auto& l, const auto& rel, std::size_t k) {
                           return precision_at_k(l, rel, k);
                         });
}

}  // namespace fairrobust
