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

#ifndef FAIRROBUST_CLI_RUN_CONFIG_HPP_
#define FAIRROBUST_CLI_RUN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fairrobust/attack.hpp"
#include "fairrobust/dataset.hpp"
#include "fairrobust/model.hpp"

namespace fairrobust::cli {

// "age:35:O:Y" turns the numeric attribute `age` into O (>= 35) / Y.
struct AttributeCut {
  std::string attribute;
  double threshold = 0.0;
  std::string label_at_least;
  std::string label_below;
};

struct DataSource {
  bool synthetic = true;
  SynthSpec synth;
  std::filesystem::path interactions;
  ColumnMapping columns;
  std::optional<std::filesystem::path> attributes;
  std::string attributes_delimiter = "\t";
  std::size_t min_interactions = 0;
  std::vector<AttributeCut> cuts;
};

struct RunConfig {
  // Seeds the synthetic generator, training and the attack.
  std::uint64_t seed = 42;
  std::filesystem::path out = "fairrobust_out";
  DataSource data;
  SplitRatios split;
  RecModelConfig model;
  AttackConfig attack;
};

RunConfig default_run_config();

// Sets one `section.key` to `value`. Throws ConfigError on an unknown key or
// a malformed value.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// "key = value" lines; '#' starts a comment.
RunConfig parse_run_config(const std::string& text, RunConfig base = default_run_config());
RunConfig load_run_config(const std::filesystem::path& path);

// Every addressable key, in a fixed order. parse_run_config(to_text(c))
// reproduces c.
std::string to_text(const RunConfig& cfg);

// Throws ConfigError naming the offending key.
void validate(const RunConfig& cfg);

// Seeds are derived from the run seed at use time.
RecModelConfig model_config(const RunConfig& cfg);
AttackConfig attack_config(const RunConfig& cfg);

}  // namespace fairrobust::cli

#endif  // FAIRROBUST_CLI_RUN_CONFIG_HPP_
