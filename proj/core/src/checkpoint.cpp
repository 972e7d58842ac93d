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

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "fairrobust/model.hpp"

namespace fairrobust {

namespace {

constexpr char kMagic[4] = {'F', 'R', 'C', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("truncated checkpoint");
  return value;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const ModelParams& params,
                     const RecModelConfig& cfg) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "embeddings.bin", std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / "embeddings.bin").string());
    out.write(kMagic, sizeof(kMagic));
    put(out, kCheckpointVersion);
    put<std::uint64_t>(out, params.num_users());
    put<std::uint64_t>(out, params.num_items());
    put<std::uint64_t>(out, params.dim());
    out.write(reinterpret_cast<const char*>(params.user_embeddings.data()),
              static_cast<std::streamsize>(params.user_embeddings.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(params.item_embeddings.data()),
              static_cast<std::streamsize>(params.item_embeddings.size() * sizeof(double)));
  }
  nlohmann::ordered_json j;
  j["checkpoint_version"] = kCheckpointVersion;
  j["num_users"] = params.num_users();
  j["num_items"] = params.num_items();
  j["dim"] = cfg.dim;
  j["layers"] = cfg.layers;
  j["learning_rate"] = cfg.learning_rate;
  j["l2"] = cfg.l2;
  j["epochs"] = cfg.epochs;
  j["patience"] = cfg.patience;
  j["negatives"] = cfg.negatives;
  j["batch_size"] = cfg.batch_size;
  j["seed"] = cfg.seed;
  j["k_eval"] = cfg.k_eval;
  std::ofstream out(dir / "model.json");
  out << j.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  Checkpoint ck;
  std::ifstream jin(dir / "model.json");
  if (!jin) throw DataError("cannot open " + (dir / "model.json").string());
  try {
    const auto j = nlohmann::json::parse(jin);
    auto& c = ck.config;
    c.dim = j.at("dim").get<std::size_t>();
    c.layers = j.at("layers").get<std::size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.l2 = j.at("l2").get<double>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.patience = j.at("patience").get<std::size_t>();
    c.negatives = j.at("negatives").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.k_eval = j.at("k_eval").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed model.json: " + std::string(e.what()));
  }

  std::ifstream in(dir / "embeddings.bin", std::ios::binary);
  if (!in) throw DataError("cannot open " + (dir / "embeddings.bin").string());
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw DataError("not a fairrobust checkpoint");
  }
  if (get<std::uint32_t>(in) != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version");
  }
  const auto nu = static_cast<Eigen::Index>(get<std::uint64_t>(in));
  const auto ni = static_cast<Eigen::Index>(get<std::uint64_t>(in));
  const auto d = static_cast<Eigen::Index>(get<std::uint64_t>(in));
  if (static_cast<std::size_t>(d) != ck.config.dim) {
    throw DataError("checkpoint dimension disagrees with model.json");
  }
  ck.params.user_embeddings.resize(nu, d);
  ck.params.item_embeddings.resize(ni, d);
  in.read(reinterpret_cast<char*>(ck.params.user_embeddings.data()),
          static_cast<std::streamsize>(nu * d * sizeof(double)));
  in.read(reinterpret_cast<char*>(ck.params.item_embeddings.data()),
          static_cast<std::streamsize>(ni * d * sizeof(double)));
  if (!in) throw DataError("truncated checkpoint");
  return ck;
}

}  // namespace fairrobust
