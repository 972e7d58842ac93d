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

#ifndef FAIRROBUST_DATASET_HPP_
#define FAIRROBUST_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairrobust/error.hpp"

namespace fairrobust {

// One raw interaction as read from an input file.
struct InteractionRecord {
  std::string user_id;
  std::string item_id;
  std::int64_t timestamp = 0;
};

// An interaction over dense user/item indices.
struct Interaction {
  Index user = 0;
  Index item = 0;
  std::int64_t timestamp = 0;

  bool operator==(const Interaction&) const = default;
};

// user_id -> attribute name -> binary group label
using AttributeTable =
    std::map<std::string, std::map<std::string, std::string>>;

// Users and items are stored in index order; `users[u]` is the external id
// of dense user index u. Interactions are unique per (user, item) pair.
struct Dataset {
  std::vector<std::string> users;
  std::vector<std::string> items;
  std::vector<Interaction> interactions;
  AttributeTable user_attributes;

  std::size_t num_users() const { return users.size(); }
  std::size_t num_items() const { return items.size(); }

  bool operator==(const Dataset&) const = default;
};

struct ColumnMapping {
  std::string user = "user_id";
  std::string item = "item_id";
  std::string timestamp = "timestamp";
  // May be longer than one character (MovieLens uses "::").
  std::string delimiter = "\t";
  // Without a header, columns are taken positionally as user, item, [rating,]
  // timestamp: the timestamp is the last field.
  bool header = true;
};

// Reads a delimiter-separated interaction file. Dense indices follow order of
// first appearance; duplicate (user, item) pairs keep the latest timestamp.
Dataset load_interactions(const std::filesystem::path& path,
                          const ColumnMapping& columns = {});

// Builds a dataset directly from records, with the same indexing and
// deduplication rules as load_interactions.
Dataset dataset_from_records(const std::vector<InteractionRecord>& records);

// Reads "user_id<delim>attribute_name<delim>label" rows (with header) into
// ds.user_attributes. Rows for unknown users are ignored.
void load_user_attributes(Dataset& ds, const std::filesystem::path& path,
                          const std::string& delimiter = "\t");

// Replaces a numeric attribute with a two-valued label: `label_at_least` when
// value >= threshold, `label_below` otherwise.
void binarize_attribute(Dataset& ds, const std::string& attribute,
                        double threshold, const std::string& label_at_least,
                        const std::string& label_below);

// Drops users with fewer than `min_count` interactions, then items left
// without interactions, and re-densifies indices preserving relative order.
Dataset filter_min_interactions(const Dataset& ds, std::size_t min_count);

struct SplitRatios {
  unsigned train = 7;
  unsigned validation = 1;
  unsigned test = 2;

  bool operator==(const SplitRatios&) const = default;
};

struct SplitDataset {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::vector<Interaction> train;
  std::vector<Interaction> validation;
  std::vector<Interaction> test;
  SplitRatios ratios;
  // Users whose validation or test part came out empty.
  std::vector<Index> flagged_users;
};

// Per user: sort by (timestamp, input order), then
//   train = max(1, floor(n * r_train / total)),
//   val   = min(floor(n * r_val / total), n - train),
//   test  = n - train - val.
SplitDataset temporal_split(const Dataset& ds, const SplitRatios& ratios = {});

enum class Stakeholder { consumer, provider };

// Two-way split of users (consumer) or items (provider). `membership[z]` is 0
// for group 1 and 1 for group 2.
struct GroupPartition {
  Stakeholder stakeholder = Stakeholder::consumer;
  std::vector<Index> members_1;
  std::vector<Index> members_2;
  std::string label_1;
  std::string label_2;
  std::vector<std::uint8_t> membership;
  // 0 or 1 once the original system has been evaluated.
  std::optional<int> advantaged;

  std::size_t size() const { return membership.size(); }
  const std::vector<Index>& members(int group) const {
    return group == 0 ? members_1 : members_2;
  }
  const std::string& label(int group) const {
    return group == 0 ? label_1 : label_2;
  }

  bool operator==(const GroupPartition&) const = default;
};

// Groups users by a binary attribute. Labels are ordered lexicographically:
// the smaller label becomes group 1.
GroupPartition partition_consumers(const Dataset& ds,
                                   const std::string& attribute);

// Short-head (group 1) vs long-tail (group 2) items by training popularity:
// the top round(|I| / 5) items by count, ties broken by lower index.
GroupPartition partition_providers_by_popularity(const SplitDataset& split);

// Per-user sorted item lists.
std::vector<std::vector<Index>> items_by_user(
    const std::vector<Interaction>& interactions, std::size_t num_users);

struct SynthSpec {
  std::size_t n_users = 200;
  std::size_t n_items = 100;
  // Mean interactions per user; each user gets at least `min_interactions`.
  double mean_interactions = 20.0;
  std::size_t min_interactions = 5;
  // Zipf exponent of item base popularity. 0 = uniform.
  double popularity_skew = 1.0;
  // Fraction of users labelled with `label_1`.
  double group_1_fraction = 0.3;
  // Fraction of group-1 interactions drawn at random instead of from the
  // user's taste cluster. 0 makes both groups statistically identical.
  double group_skew = 0.5;
  std::size_t n_clusters = 5;
  // Probability that a regular interaction stays inside the user's cluster.
  double cluster_affinity = 0.85;
  std::string attribute = "gender";
  std::string label_1 = "F";
  std::string label_2 = "M";
};

// Deterministic synthetic dataset with popularity skew and a utility gap
// between two consumer groups.
Dataset synth_generate(std::uint64_t seed, const SynthSpec& spec = {});

// Canonical on-disk form: <dir>/interactions.tsv (dense indices) and
// <dir>/dataset.json (index maps, attributes, partitions).
void save_dataset(const std::filesystem::path& dir, const Dataset& ds,
                  const std::vector<GroupPartition>& partitions = {});
Dataset load_dataset(const std::filesystem::path& dir);
std::vector<GroupPartition> load_partitions(const std::filesystem::path& dir);

}  // namespace fairrobust

#endif  // FAIRROBUST_DATASET_HPP_
