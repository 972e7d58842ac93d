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

#include "fairrobust/fairmetrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace fairrobust {

namespace {

double discount(std::size_t position) {  // position is 0-based
  return 1.0 / std::log2(static_cast<double>(position) + 2.0);
}

bool contains(std::span<const Index> sorted, Index item) {
  return std::binary_search(sorted.begin(), sorted.end(), item);
}

std::vector<std::uint8_t> membership_mask(std::span<const Index> group_items,
                                          std::size_t n_items) {
  if (group_items.empty()) throw DataError("empty item group");
  std::vector<std::uint8_t> mask(n_items, 0);
  for (Index i : group_items) {
    if (i >= n_items) throw DataError("group item out of range");
    mask[i] = 1;
  }
  return mask;
}

}  // namespace

const char* to_string(FairnessKind kind) {
  switch (kind) {
    case FairnessKind::cp: return "cp";
    case FairnessKind::cs: return "cs";
    case FairnessKind::pe: return "pe";
    case FairnessKind::pv: return "pv";
  }
  return "?";
}

FairnessKind fairness_kind_from_string(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "cp") return FairnessKind::cp;
  if (s == "cs") return FairnessKind::cs;
  if (s == "pe") return FairnessKind::pe;
  if (s == "pv") return FairnessKind::pv;
  throw ConfigError("unknown operationalization '" + name + "' (expected cp|cs|pe|pv)");
}

Stakeholder stakeholder_of(FairnessKind kind) {
  return kind == FairnessKind::cp || kind == FairnessKind::cs ? Stakeholder::consumer
                                                              : Stakeholder::provider;
}

std::size_t default_k_opt(std::size_t n_items, std::size_t k_eval) {
  const auto ten_percent =
      static_cast<std::size_t>(std::lround(0.1 * static_cast<double>(n_items)));
  return std::max(k_eval, ten_percent);
}

FairnessOperationalization make_operationalization(FairnessKind kind,
                                                   std::size_t n_items,
                                                   std::size_t k_eval, double tau) {
  if (k_eval == 0) throw ConfigError("k_eval must be >= 1");
  if (!(tau > 0.0)) throw ConfigError("tau must be > 0");
  return {kind, k_eval, default_k_opt(n_items, k_eval), tau};
}

double ndcg_at_k(std::span<const Index> list, std::span<const Index> relevant,
                 std::size_t k) {
  if (relevant.empty()) return 0.0;
  double dcg = 0.0;
  const std::size_t n = std::min(k, list.size());
  for (std::size_t p = 0; p < n; ++p) {
    if (contains(relevant, list[p])) dcg += discount(p);
  }
  double ideal = 0.0;
  const std::size_t m = std::min(k, relevant.size());
  for (std::size_t p = 0; p < m; ++p) ideal += discount(p);
  return dcg / ideal;
}

double precision_at_k(std::span<const Index> list, std::span<const Index> relevant,
                      std::size_t k) {
  if (k == 0) throw ConfigError("k must be >= 1");
  std::size_t hits = 0;
  const std::size_t n = std::min(k, list.size());
  for (std::size_t p = 0; p < n; ++p) {
    if (contains(relevant, list[p])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

double exposure(const RecommendationLists& lists, std::span<const Index> group_items,
                std::size_t n_items) {
  const auto mask = membership_mask(group_items, n_items);
  if (lists.lists.empty()) throw DataError("no recommendation lists");
  double total = 0.0;
  for (const auto& list : lists.lists) {
    double num = 0.0;
    double den = 0.0;
    const std::size_t n = std::min(lists.k, list.items.size());
    for (std::size_t p = 0; p < n; ++p) {
      const double d = discount(p);
      den += d;
      if (mask[list.items[p]]) num += d;
    }
    if (den > 0.0) total += num / den;
  }
  const double scale =
      static_cast<double>(n_items) / static_cast<double>(group_items.size());
  return scale * total / static_cast<double>(lists.lists.size());
}

double visibility(const RecommendationLists& lists,
                  std::span<const Index> group_items, std::size_t n_items) {
  const auto mask = membership_mask(group_items, n_items);
  if (lists.lists.empty()) throw DataError("no recommendation lists");
  std::size_t hits = 0;
  for (const auto& list : lists.lists) {
    const std::size_t n = std::min(lists.k, list.items.size());
    for (std::size_t p = 0; p < n; ++p) hits += mask[list.items[p]];
  }
  const double scale =
      static_cast<double>(n_items) / static_cast<double>(group_items.size());
  return scale * static_cast<double>(hits) /
         (static_cast<double>(lists.lists.size()) * static_cast<double>(lists.k));
}

double demographic_parity(double s1, double s2) {
  const double gap = s1 - s2;
  return gap * gap;
}

EvaluationContext make_evaluation_context(const SplitDataset& split) {
  EvaluationContext ctx;
  ctx.num_users = split.num_users;
  ctx.num_items = split.num_items;
  ctx.exclude = items_by_user(split.train, split.num_users);
  ctx.relevant = items_by_user(split.test, split.num_users);
  return ctx;
}

std::vector<Index> evaluated_users(FairnessKind kind, const EvaluationContext& ctx) {
  std::vector<Index> users;
  for (Index u = 0; u < ctx.num_users; ++u) {
    if (stakeholder_of(kind) == Stakeholder::provider ||
        (u < ctx.relevant.size() && !ctx.relevant[u].empty())) {
      users.push_back(u);
    }
  }
  return users;
}

MetricReport group_metric(const FairnessOperationalization& op,
                          const RecommendationLists& lists,
                          const EvaluationContext& ctx,
                          const GroupPartition& partition) {
  if (partition.stakeholder != stakeholder_of(op.kind)) {
    throw ConfigError(std::string("operationalization ") + to_string(op.kind) +
                      " needs a " +
                      (stakeholder_of(op.kind) == Stakeholder::consumer ? "consumer"
                                                                        : "provider") +
                      " partition");
  }
  MetricReport report;
  report.kind = op.kind;
  report.k_eval = op.k_eval;
  report.k_opt = op.k_opt;

  if (partition.stakeholder == Stakeholder::consumer) {
    report.raw.assign(ctx.num_users, std::numeric_limits<double>::quiet_NaN());
    double sum[2] = {0.0, 0.0};
    std::size_t count[2] = {0, 0};
    for (std::size_t r = 0; r < lists.users.size(); ++r) {
      const Index u = lists.users[r];
      if (u >= ctx.relevant.size() || ctx.relevant[u].empty()) continue;
      if (u >= partition.size()) throw DataError("user outside consumer partition");
      const auto& items = lists.lists[r].items;
      const double v = op.kind == FairnessKind::cp
                           ? ndcg_at_k(items, ctx.relevant[u], op.k_eval)
                           : precision_at_k(items, ctx.relevant[u], op.k_eval);
      report.raw[u] = v;
      const int g = partition.membership[u];
      sum[g] += v;
      ++count[g];
    }
    for (int g = 0; g < 2; ++g) {
      if (count[g] == 0) {
        throw DataError("consumer group '" + partition.label(g) +
                        "' has no user with test interactions");
      }
    }
    report.s1 = sum[0] / static_cast<double>(count[0]);
    report.s2 = sum[1] / static_cast<double>(count[1]);
  } else {
    RecommendationLists cut = lists;
    cut.k = op.k_eval;
    auto metric = op.kind == FairnessKind::pe ? exposure : visibility;
    report.s1 = metric(cut, partition.members_1, ctx.num_items);
    report.s2 = metric(cut, partition.members_2, ctx.num_items);
    report.raw = {report.s1, report.s2};
  }
  report.dp = demographic_parity(report.s1, report.s2);
  return report;
}

std::string to_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(report.kind);
  j["S1"] = report.s1;
  j["S2"] = report.s2;
  j["DP"] = report.dp;
  j["k_eval"] = report.k_eval;
  j["k_opt"] = report.k_opt;
  return j.dump();
}

MetricReport metric_report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MetricReport r;
    r.kind = fairness_kind_from_string(j.at("kind").get<std::string>());
    r.s1 = j.at("S1").get<double>();
    r.s2 = j.at("S2").get<double>();
    r.dp = j.at("DP").get<double>();
    r.k_eval = j.at("k_eval").get<std::size_t>();
    r.k_opt = j.at("k_opt").get<std::size_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed metric report: " + std::string(e.what()));
  }
}

}  // namespace fairrobust
