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
#include <unordered_set>

#include "fairrobust/dataset.hpp"

namespace fairrobust {

namespace {

// Distribution helpers are written out so the generated data depends only on
// the mt19937_64 stream, not on the standard library's distributions.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

std::size_t sample_cumulative(std::mt19937_64& rng,
                              const std::vector<double>& cumulative) {
  const double target = uniform01(rng) * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  return std::min<std::size_t>(it - cumulative.begin(), cumulative.size() - 1);
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t k = v.size(); k > 1; --k) {
    std::swap(v[k - 1], v[uniform_index(rng, k)]);
  }
}

}  // namespace

Dataset synth_generate(std::uint64_t seed, const SynthSpec& spec) {
  if (spec.n_users < 2 || spec.n_items < 2) {
    throw ConfigError("synthetic dataset needs at least 2 users and 2 items");
  }
  if (spec.mean_interactions <= 0.0 || spec.min_interactions == 0) {
    throw ConfigError("synthetic dataset would have no interactions");
  }
  if (spec.group_1_fraction < 0.0 || spec.group_1_fraction > 1.0 ||
      spec.group_skew < 0.0 || spec.group_skew > 1.0 ||
      spec.cluster_affinity < 0.0 || spec.cluster_affinity > 1.0) {
    throw ConfigError("synthetic fractions must lie in [0, 1]");
  }
  if (spec.n_clusters == 0) throw ConfigError("n_clusters must be >= 1");

  std::mt19937_64 rng(seed);
  const std::size_t n_users = spec.n_users;
  const std::size_t n_items = spec.n_items;
  const std::size_t max_per_user = std::max<std::size_t>(1, n_items * 4 / 5);

  std::vector<double> popularity(n_items);
  for (std::size_t r = 0; r < n_items; ++r) {
    popularity[r] = 1.0 / std::pow(static_cast<double>(r + 1), spec.popularity_skew);
  }
  std::vector<std::size_t> item_cluster(n_items);
  for (auto& c : item_cluster) c = uniform_index(rng, spec.n_clusters);

  std::vector<double> global_cum(n_items);
  std::partial_sum(popularity.begin(), popularity.end(), global_cum.begin());
  std::vector<std::vector<Index>> cluster_items(spec.n_clusters);
  std::vector<std::vector<double>> cluster_cum(spec.n_clusters);
  for (Index i = 0; i < n_items; ++i) {
    const auto c = item_cluster[i];
    cluster_items[c].push_back(i);
    const double prev = cluster_cum[c].empty() ? 0.0 : cluster_cum[c].back();
    cluster_cum[c].push_back(prev + popularity[i]);
  }

  const auto n_group_1 = static_cast<std::size_t>(
      std::lround(spec.group_1_fraction * static_cast<double>(n_users)));
  std::vector<std::uint8_t> in_group_1(n_users, 0);
  std::fill_n(in_group_1.begin(), std::min(n_group_1, n_users), 1);
  shuffle(in_group_1, rng);

  Dataset ds;
  ds.users.reserve(n_users);
  ds.items.reserve(n_items);
  for (std::size_t u = 0; u < n_users; ++u) ds.users.push_back("u" + std::to_string(u));
  for (std::size_t i = 0; i < n_items; ++i) ds.items.push_back("i" + std::to_string(i));

  for (std::size_t u = 0; u < n_users; ++u) {
    std::size_t cluster = uniform_index(rng, spec.n_clusters);
    while (cluster_items[cluster].empty()) cluster = (cluster + 1) % spec.n_clusters;
    const double extra = std::max(0.0, spec.mean_interactions -
                                           static_cast<double>(spec.min_interactions));
    const auto draw = static_cast<std::size_t>(
        std::floor(-std::log(1.0 - uniform01(rng)) * extra));
    const std::size_t n_u =
        std::min(max_per_user, spec.min_interactions + draw);
    const double noise = in_group_1[u] ? spec.group_skew : 0.0;

    std::unordered_set<Index> chosen;
    std::int64_t t = 1'000'000 + static_cast<std::int64_t>(uniform_index(rng, 100'000));
    std::size_t attempts = 0;
    while (chosen.size() < n_u && attempts < 1000 * n_u) {
      ++attempts;
      Index item = 0;
      const double mode = uniform01(rng);
      if (mode < noise) {
        item = uniform_index(rng, n_items);
      } else if (uniform01(rng) < spec.cluster_affinity) {
        item = cluster_items[cluster][sample_cumulative(rng, cluster_cum[cluster])];
      } else {
        item = sample_cumulative(rng, global_cum);
      }
      if (!chosen.insert(item).second) continue;
      t += 1 + static_cast<std::int64_t>(uniform_index(rng, 3600));
      ds.interactions.push_back({u, item, t});
    }
    ds.user_attributes[ds.users[u]][spec.attribute] =
        in_group_1[u] ? spec.label_1 : spec.label_2;
  }
  if (ds.interactions.empty()) throw DataError("synthetic dataset is empty");
  return ds;
}

}  // namespace fairrobust
