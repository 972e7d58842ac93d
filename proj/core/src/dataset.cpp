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

#include "fairrobust/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string_view>
#include <unordered_map>

namespace fairrobust {

namespace {

std::vector<std::string_view> split_fields(std::string_view line,
                                           std::string_view delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + delimiter.size();
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

std::size_t column_index(const std::vector<std::string_view>& header,
                         const std::string& name,
                         const std::filesystem::path& path) {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (trim(header[c]) == name) return c;
  }
  throw DataError(where(path, 1) + "missing column '" + name + "'");
}

}  // namespace

Dataset dataset_from_records(const std::vector<InteractionRecord>& records) {
  Dataset ds;
  std::unordered_map<std::string, Index> user_index;
  std::unordered_map<std::string, Index> item_index;
  std::unordered_map<std::uint64_t, std::size_t> pair_position;
  for (const auto& r : records) {
    if (r.user_id.empty() || r.item_id.empty()) {
      throw DataError("interaction with empty user or item id");
    }
    if (r.timestamp < 0) {
      throw DataError("negative timestamp for user " + r.user_id);
    }
    auto [uit, unew] = user_index.try_emplace(r.user_id, ds.users.size());
    if (unew) ds.users.push_back(r.user_id);
    auto [iit, inew] = item_index.try_emplace(r.item_id, ds.items.size());
    if (inew) ds.items.push_back(r.item_id);
    const Index u = uit->second;
    const Index i = iit->second;
    const std::uint64_t key = (static_cast<std::uint64_t>(u) << 32) | i;
    auto [pit, pnew] = pair_position.try_emplace(key, ds.interactions.size());
    if (pnew) {
      ds.interactions.push_back({u, i, r.timestamp});
    } else {
      auto& kept = ds.interactions[pit->second];
      kept.timestamp = std::max(kept.timestamp, r.timestamp);
    }
  }
  return ds;
}

Dataset load_interactions(const std::filesystem::path& path,
                          const ColumnMapping& columns) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  if (columns.delimiter.empty()) throw ConfigError("empty delimiter");

  std::vector<InteractionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  std::size_t user_col = 0;
  std::size_t item_col = 1;
  std::optional<std::size_t> time_col;
  std::size_t needed = 0;
  if (columns.header) {
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
    ++line_no;
    const auto header = split_fields(line, columns.delimiter);
    user_col = column_index(header, columns.user, path);
    item_col = column_index(header, columns.item, path);
    time_col = column_index(header, columns.timestamp, path);
    needed = std::max({user_col, item_col, *time_col}) + 1;
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, columns.delimiter);
    std::size_t tcol = 0;
    if (columns.header) {
      if (fields.size() < needed) {
        throw DataError(where(path, line_no) + "expected at least " +
                        std::to_string(needed) + " fields, got " +
                        std::to_string(fields.size()));
      }
      tcol = *time_col;
    } else {
      if (fields.size() < 3) {
        throw DataError(where(path, line_no) + "expected at least 3 fields");
      }
      tcol = fields.size() - 1;
    }
    InteractionRecord rec;
    rec.user_id = std::string(trim(fields[user_col]));
    rec.item_id = std::string(trim(fields[item_col]));
    const auto ts = trim(fields[tcol]);
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), value);
    if (ec != std::errc() || ptr != ts.data() + ts.size() || value < 0) {
      throw DataError(where(path, line_no) + "bad timestamp '" +
                      std::string(ts) + "'");
    }
    if (rec.user_id.empty() || rec.item_id.empty()) {
      throw DataError(where(path, line_no) + "empty user or item id");
    }
    rec.timestamp = value;
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw DataError(path.string() + ": no interactions");
  return dataset_from_records(records);
}

void load_user_attributes(Dataset& ds, const std::filesystem::path& path,
                          const std::string& delimiter) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  std::set<std::string> known(ds.users.begin(), ds.users.end());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, delimiter);
    if (fields.size() < 3) {
      throw DataError(where(path, line_no) + "expected user_id, attribute, label");
    }
    std::string user(trim(fields[0]));
    if (!known.contains(user)) continue;
    ds.user_attributes[user][std::string(trim(fields[1]))] =
        std::string(trim(fields[2]));
  }
}

void binarize_attribute(Dataset& ds, const std::string& attribute,
                        double threshold, const std::string& label_at_least,
                        const std::string& label_below) {
  for (auto& [user, attrs] : ds.user_attributes) {
    auto it = attrs.find(attribute);
    if (it == attrs.end()) continue;
    double value = 0.0;
    const std::string& s = it->second;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw DataError("attribute '" + attribute + "' of user " + user +
                      " is not numeric: '" + s + "'");
    }
    it->second = value >= threshold ? label_at_least : label_below;
  }
}

Dataset filter_min_interactions(const Dataset& ds, std::size_t min_count) {
  if (min_count < 1) throw ConfigError("min interactions must be >= 1");
  std::vector<std::size_t> count(ds.num_users(), 0);
  for (const auto& x : ds.interactions) ++count[x.user];

  std::vector<std::optional<Index>> user_map(ds.num_users());
  Dataset out;
  for (Index u = 0; u < ds.num_users(); ++u) {
    if (count[u] >= min_count) {
      user_map[u] = out.users.size();
      out.users.push_back(ds.users[u]);
    }
  }
  std::vector<bool> item_used(ds.num_items(), false);
  for (const auto& x : ds.interactions) {
    if (user_map[x.user]) item_used[x.item] = true;
  }
  std::vector<std::optional<Index>> item_map(ds.num_items());
  for (Index i = 0; i < ds.num_items(); ++i) {
    if (item_used[i]) {
      item_map[i] = out.items.size();
      out.items.push_back(ds.items[i]);
    }
  }
  for (const auto& x : ds.interactions) {
    if (user_map[x.user]) {
      out.interactions.push_back({*user_map[x.user], *item_map[x.item], x.timestamp});
    }
  }
  if (out.interactions.empty()) {
    throw DataError("no user has at least " + std::to_string(min_count) +
                    " interactions");
  }
  for (const auto& id : out.users) {
    auto it = ds.user_attributes.find(id);
    if (it != ds.user_attributes.end()) out.user_attributes.insert(*it);
  }
  return out;
}

SplitDataset temporal_split(const Dataset& ds, const SplitRatios& ratios) {
  const std::uint64_t total =
      std::uint64_t{ratios.train} + ratios.validation + ratios.test;
  if (total == 0) throw ConfigError("split ratios must sum to a positive value");

  std::vector<std::vector<std::size_t>> per_user(ds.num_users());
  for (std::size_t k = 0; k < ds.interactions.size(); ++k) {
    per_user[ds.interactions[k].user].push_back(k);
  }

  SplitDataset split;
  split.num_users = ds.num_users();
  split.num_items = ds.num_items();
  split.ratios = ratios;
  for (Index u = 0; u < ds.num_users(); ++u) {
    auto& rows = per_user[u];
    if (rows.empty()) continue;
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
      return ds.interactions[a].timestamp < ds.interactions[b].timestamp;
    });
    const std::uint64_t n = rows.size();
    std::uint64_t n_train = std::max<std::uint64_t>(1, n * ratios.train / total);
    std::uint64_t n_val = std::min(n * ratios.validation / total, n - n_train);
    const std::uint64_t n_test = n - n_train - n_val;
    for (std::uint64_t k = 0; k < n; ++k) {
      const auto& x = ds.interactions[rows[k]];
      if (k < n_train) {
        split.train.push_back(x);
      } else if (k < n_train + n_val) {
        split.validation.push_back(x);
      } else {
        split.test.push_back(x);
      }
    }
    if (n_val == 0 || n_test == 0) split.flagged_users.push_back(u);
  }
  return split;
}

GroupPartition partition_consumers(const Dataset& ds,
                                   const std::string& attribute) {
  std::vector<std::string> labels(ds.num_users());
  std::set<std::string> distinct;
  for (Index u = 0; u < ds.num_users(); ++u) {
    const auto uit = ds.user_attributes.find(ds.users[u]);
    if (uit == ds.user_attributes.end()) {
      throw DataError("user " + ds.users[u] + " has no attribute '" +
                      attribute + "'");
    }
    const auto ait = uit->second.find(attribute);
    if (ait == uit->second.end()) {
      throw DataError("user " + ds.users[u] + " has no attribute '" +
                      attribute + "'");
    }
    labels[u] = ait->second;
    distinct.insert(ait->second);
  }
  if (distinct.size() > 2) {
    throw DataError("attribute '" + attribute + "' has " +
                    std::to_string(distinct.size()) + " labels, expected 2");
  }
  if (distinct.size() < 2) {
    throw DataError("attribute '" + attribute + "' leaves one group empty");
  }
  GroupPartition p;
  p.stakeholder = Stakeholder::consumer;
  p.label_1 = *distinct.begin();
  p.label_2 = *std::next(distinct.begin());
  p.membership.resize(ds.num_users());
  for (Index u = 0; u < ds.num_users(); ++u) {
    if (labels[u] == p.label_1) {
      p.members_1.push_back(u);
      p.membership[u] = 0;
    } else {
      p.members_2.push_back(u);
      p.membership[u] = 1;
    }
  }
  return p;
}

GroupPartition partition_providers_by_popularity(const SplitDataset& split) {
  const std::size_t n = split.num_items;
  if (n < 5) throw DataError("provider partition needs at least 5 items");
  std::vector<std::size_t> count(n, 0);
  for (const auto& x : split.train) ++count[x.item];
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return count[a] > count[b]; });
  const auto head = static_cast<std::size_t>(std::lround(static_cast<double>(n) / 5.0));

  GroupPartition p;
  p.stakeholder = Stakeholder::provider;
  p.label_1 = "short-head";
  p.label_2 = "long-tail";
  p.membership.assign(n, 1);
  for (std::size_t r = 0; r < head; ++r) p.membership[order[r]] = 0;
  for (Index i = 0; i < n; ++i) {
    (p.membership[i] == 0 ? p.members_1 : p.members_2).push_back(i);
  }
  return p;
}

std::vector<std::vector<Index>> items_by_user(
    const std::vector<Interaction>& interactions, std::size_t num_users) {
  std::vector<std::vector<Index>> out(num_users);
  for (const auto& x : interactions) {
    if (x.user >= num_users) throw DataError("user index out of range");
    out[x.user].push_back(x.item);
  }
  for (auto& items : out) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
  }
  return out;
}

}  // namespace fairrobust
