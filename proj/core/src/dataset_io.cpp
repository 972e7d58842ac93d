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

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fairrobust/dataset.hpp"

namespace fairrobust {

namespace {

using nlohmann::json;

constexpr int kDatasetSchemaVersion = 1;

json partition_to_json(const GroupPartition& p) {
  json j;
  j["stakeholder"] = p.stakeholder == Stakeholder::consumer ? "consumer" : "provider";
  j["label_1"] = p.label_1;
  j["label_2"] = p.label_2;
  j["members_1"] = p.members_1;
  j["members_2"] = p.members_2;
  return j;
}

GroupPartition partition_from_json(const json& j) {
  GroupPartition p;
  p.stakeholder = j.at("stakeholder").get<std::string>() == "consumer"
                      ? Stakeholder::consumer
                      : Stakeholder::provider;
  p.label_1 = j.at("label_1").get<std::string>();
  p.label_2 = j.at("label_2").get<std::string>();
  p.members_1 = j.at("members_1").get<std::vector<Index>>();
  p.members_2 = j.at("members_2").get<std::vector<Index>>();
  p.membership.assign(p.members_1.size() + p.members_2.size(), 0);
  for (Index z : p.members_2) {
    if (z >= p.membership.size()) throw DataError("partition member out of range");
    p.membership[z] = 1;
  }
  return p;
}

json read_sidecar(const std::filesystem::path& dir) {
  std::ifstream in(dir / "dataset.json");
  if (!in) throw DataError("cannot open " + (dir / "dataset.json").string());
  try {
    json j = json::parse(in);
    if (j.at("schema_version").get<int>() != kDatasetSchemaVersion) {
      throw DataError("unsupported dataset schema version");
    }
    return j;
  } catch (const json::exception& e) {
    throw DataError("malformed dataset.json: " + std::string(e.what()));
  }
}

}  // namespace

void save_dataset(const std::filesystem::path& dir, const Dataset& ds,
                  const std::vector<GroupPartition>& partitions) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "interactions.tsv");
    if (!out) throw DataError("cannot write " + (dir / "interactions.tsv").string());
    out << "user\titem\ttimestamp\n";
    for (const auto& x : ds.interactions) {
      out << x.user << '\t' << x.item << '\t' << x.timestamp << '\n';
    }
  }
  json j;
  j["schema_version"] = kDatasetSchemaVersion;
  j["users"] = ds.users;
  j["items"] = ds.items;
  j["user_attributes"] = ds.user_attributes;
  j["partitions"] = json::array();
  for (const auto& p : partitions) j["partitions"].push_back(partition_to_json(p));
  std::ofstream out(dir / "dataset.json");
  if (!out) throw DataError("cannot write " + (dir / "dataset.json").string());
  out << j.dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const json j = read_sidecar(dir);
  Dataset ds;
  ds.users = j.at("users").get<std::vector<std::string>>();
  ds.items = j.at("items").get<std::vector<std::string>>();
  ds.user_attributes = j.at("user_attributes").get<AttributeTable>();

  std::ifstream in(dir / "interactions.tsv");
  if (!in) throw DataError("cannot open " + (dir / "interactions.tsv").string());
  std::string line;
  std::getline(in, line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    Interaction x;
    if (!(fields >> x.user >> x.item >> x.timestamp) || x.user >= ds.num_users() ||
        x.item >= ds.num_items()) {
      throw DataError((dir / "interactions.tsv").string() + ":" +
                      std::to_string(line_no) + ": malformed row");
    }
    ds.interactions.push_back(x);
  }
  return ds;
}

std::vector<GroupPartition> load_partitions(const std::filesystem::path& dir) {
  const json j = read_sidecar(dir);
  std::vector<GroupPartition> out;
  for (const auto& p : j.at("partitions")) out.push_back(partition_from_json(p));
  return out;
}

}  // namespace fairrobust
