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

#include "fairrobust/fairmetrics.hpp"

namespace fairrobust {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double ideal_dcg(std::size_t n) {
  double total = 0.0;
  for (std::size_t p = 0; p < n; ++p) total += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  return total;
}

// Candidate items of one user: every item not in the sorted exclusion list.
std::vector<Index> candidates_for(const EvaluationContext& ctx, Index user) {
  std::vector<Index> out;
  out.reserve(ctx.num_items);
  const std::vector<Index>* skip =
      user < ctx.exclude.size() ? &ctx.exclude[user] : nullptr;
  std::size_t s = 0;
  for (Index i = 0; i < ctx.num_items; ++i) {
    if (skip) {
      while (s < skip->size() && (*skip)[s] < i) ++s;
      if (s < skip->size() && (*skip)[s] == i) continue;
    }
    out.push_back(i);
  }
  return out;
}

// Positions of the k highest scores, ties to the lower position.
std::vector<std::size_t> top_positions(std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t m = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                    });
  order.resize(m);
  return order;
}

}  // namespace

SmoothValue approx_ndcg(std::span<const double> scores, std::span<const Index> relevant,
                        double tau) {
  if (!(tau > 0.0)) throw ConfigError("tau must be > 0");
  SmoothValue out;
  out.gradient.assign(scores.size(), 0.0);
  if (relevant.empty()) return out;
  const double idcg = ideal_dcg(relevant.size());
  for (Index i : relevant) {
    if (i >= scores.size()) throw DataError("relevant position out of range");
    double rank = 1.0;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (j != i) rank += sigmoid((scores[j] - scores[i]) / tau);
    }
    const double log_term = std::log2(rank + 1.0);
    out.value += 1.0 / log_term;
    // d(1 / log2(r + 1)) / dr
    const double dgain = -1.0 / ((rank + 1.0) * kLn2 * log_term * log_term) / idcg;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (j == i) continue;
      const double s = sigmoid((scores[j] - scores[i]) / tau);
      const double d = dgain * s * (1.0 - s) / tau;
      out.gradient[j] += d;
      out.gradient[i] -= d;
    }
  }
  out.value /= idcg;
  return out;
}

SmoothValue bce_topk_surrogate(std::span<const double> scores,
                               std::span<const std::uint8_t> targets,
                               BceWeighting weighting) {
  if (scores.size() != targets.size()) {
    throw DataError("scores and targets differ in length");
  }
  if (scores.empty()) throw DataError("empty target vector");
  SmoothValue out;
  out.gradient.assign(scores.size(), 0.0);
  std::size_t positives = 0;
  for (auto t : targets) positives += t ? 1 : 0;
  const std::size_t negatives = scores.size() - positives;

  for (std::size_t j = 0; j < scores.size(); ++j) {
    const double t = targets[j] ? 1.0 : 0.0;
    double w = 1.0 / static_cast<double>(scores.size());
    if (weighting == BceWeighting::balanced && positives > 0 && negatives > 0) {
      w = 0.5 / static_cast<double>(targets[j] ? positives : negatives);
    }
    // -[t ln sigmoid(s) + (1 - t) ln(1 - sigmoid(s))] = softplus(s) - t s
    out.value += w * (softplus(scores[j]) - t * scores[j]);
    out.gradient[j] = w * (sigmoid(scores[j]) - t);
  }
  return out;
}

SmoothValue exposure_surrogate(std::span<const double> scores,
                               std::span<const std::uint8_t> in_group,
                               std::size_t k_opt) {
  if (scores.size() != in_group.size()) {
    throw DataError("scores and group mask differ in length");
  }
  if (k_opt == 0) throw ConfigError("k_opt must be >= 1");
  SmoothValue out;
  out.gradient.assign(scores.size(), 0.0);
  const auto top = top_positions(scores, k_opt);
  if (top.empty()) return out;
  const double den = ideal_dcg(top.size());
  for (std::size_t p = 0; p < top.size(); ++p) {
    const std::size_t j = top[p];
    if (!in_group[j]) continue;
    const double w = 1.0 / std::log2(static_cast<double>(p) + 2.0) / den;
    const double s = sigmoid(scores[j]);
    out.value += w * s;
    out.gradient[j] = w * s * (1.0 - s);
  }
  return out;
}

SurrogateReport group_metric_surrogate(const FairnessOperationalization& op,
                                       const Matrix& scores,
                                       std::span<const Index> users,
                                       const EvaluationContext& ctx,
                                       const GroupPartition& partition) {
  if (partition.stakeholder != stakeholder_of(op.kind)) {
    throw ConfigError("partition stakeholder does not match operationalization");
  }
  if (static_cast<std::size_t>(scores.rows()) != users.size() ||
      static_cast<std::size_t>(scores.cols()) != ctx.num_items) {
    throw DataError("score matrix shape does not match users x items");
  }
  SurrogateReport out;
  // grad[g] holds d S_g / d scores.
  Matrix grad[2] = {Matrix::Zero(scores.rows(), scores.cols()),
                    Matrix::Zero(scores.rows(), scores.cols())};
  double sum[2] = {0.0, 0.0};
  double norm[2] = {0.0, 0.0};
  std::vector<double> cand_scores;

  const bool consumer = partition.stakeholder == Stakeholder::consumer;
  for (std::size_t r = 0; r < users.size(); ++r) {
    const Index u = users[r];
    const auto row = scores.row(static_cast<Eigen::Index>(r));
    const auto cand = candidates_for(ctx, u);
    cand_scores.resize(cand.size());
    for (std::size_t c = 0; c < cand.size(); ++c) {
      cand_scores[c] = row(static_cast<Eigen::Index>(cand[c]));
    }
    auto scatter = [&](int g, const std::vector<double>& g_cand, double scale) {
      for (std::size_t c = 0; c < cand.size(); ++c) {
        grad[g](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cand[c])) +=
            scale * g_cand[c];
      }
    };

    if (consumer) {
      if (u >= ctx.relevant.size() || ctx.relevant[u].empty()) continue;
      if (u >= partition.size()) throw DataError("user outside consumer partition");
      const int g = partition.membership[u];
      SmoothValue v;
      if (op.kind == FairnessKind::cp) {
        std::vector<Index> rel_pos;
        for (std::size_t c = 0; c < cand.size(); ++c) {
          if (std::binary_search(ctx.relevant[u].begin(), ctx.relevant[u].end(), cand[c])) {
            rel_pos.push_back(c);
          }
        }
        v = approx_ndcg(cand_scores, rel_pos, op.tau);
      } else {
        std::vector<std::uint8_t> targets(cand.size(), 0);
        for (std::size_t c = 0; c < cand.size(); ++c) {
          targets[c] = std::binary_search(ctx.relevant[u].begin(),
                                          ctx.relevant[u].end(), cand[c]);
        }
        v = bce_topk_surrogate(cand_scores, targets, BceWeighting::balanced);
      }
      sum[g] += v.value;
      norm[g] += 1.0;
      scatter(g, v.gradient, 1.0);
    } else {
      for (int g = 0; g < 2; ++g) {
        std::vector<std::uint8_t> in_group(cand.size());
        for (std::size_t c = 0; c < cand.size(); ++c) {
          in_group[c] = partition.membership[cand[c]] == g ? 1 : 0;
        }
        SmoothValue v;
        if (op.kind == FairnessKind::pe) {
          v = exposure_surrogate(cand_scores, in_group, op.k_opt);
        } else {
          v = bce_topk_surrogate(cand_scores, in_group, BceWeighting::balanced);
        }
        sum[g] += v.value;
        norm[g] += 1.0;
        scatter(g, v.gradient, 1.0);
      }
    }
  }

  double scale[2] = {1.0, 1.0};
  if (!consumer && op.kind == FairnessKind::pe) {
    for (int g = 0; g < 2; ++g) {
      scale[g] = static_cast<double>(ctx.num_items) /
                 static_cast<double>(partition.members(g).size());
    }
  }
  double s[2];
  for (int g = 0; g < 2; ++g) {
    if (norm[g] == 0.0) {
      throw DataError("group '" + partition.label(g) + "' has no evaluable members");
    }
    s[g] = scale[g] * sum[g] / norm[g];
    grad[g] *= scale[g] / norm[g];
  }
  out.s1 = s[0];
  out.s2 = s[1];
  out.dp = demographic_parity(s[0], s[1]);
  out.gradient = 2.0 * (s[0] - s[1]) * (grad[0] - grad[1]);
  return out;
}

}  // namespace fairrobust
