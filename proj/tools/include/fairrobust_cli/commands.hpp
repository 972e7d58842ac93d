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

#ifndef FAIRROBUST_CLI_COMMANDS_HPP_
#define FAIRROBUST_CLI_COMMANDS_HPP_

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fairrobust/report.hpp"
#include "fairrobust_cli/run_config.hpp"

namespace fairrobust::cli {

// Output layout under cfg.out:
//   data/                  canonical dataset and partitions
//   model/                 checkpoint and train_report.json
//   runs/<op>_<kind>/      one attack run
std::filesystem::path data_dir(const RunConfig& cfg);
std::filesystem::path model_dir(const RunConfig& cfg);
std::filesystem::path runs_dir(const RunConfig& cfg);
std::filesystem::path run_dir(const RunConfig& cfg);
std::string run_name(FairnessKind op, PerturbationKind kind);

struct PrepareSummary {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t interactions = 0;
  std::vector<GroupPartition> partitions;
};

struct SplitMetrics {
  double ndcg = 0.0;
  double precision = 0.0;
};

struct TrainSummary {
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  SplitMetrics validation;
  SplitMetrics test;
  // Expected test NDCG@k of a uniformly random ranking.
  double random_ndcg = 0.0;
};

struct AttackSummary {
  std::filesystem::path run_dir;
  RobustnessReport report;
  std::vector<EdgeImpact> impacts;
};

struct SweepEntry {
  FairnessKind op = FairnessKind::cp;
  PerturbationKind kind = PerturbationKind::deletion;
  std::optional<AttackSummary> summary;
  std::string error;
};

PrepareSummary cmd_prepare(const RunConfig& cfg, std::ostream& log);
TrainSummary cmd_train(const RunConfig& cfg, std::ostream& log);
AttackSummary cmd_attack(const RunConfig& cfg, std::ostream& log);
// All four operationalizations times both kinds. `jobs` > 1 runs attacks in
// parallel; results come back in a fixed order.
std::vector<SweepEntry> cmd_sweep(const RunConfig& cfg, std::size_t jobs, std::ostream& log);
// Rebuilds report.json, trend.csv and edge_impact.json of every run under
// runs/ from the stored artifacts and prints a summary table.
std::vector<AttackSummary> cmd_report(const RunConfig& cfg, std::ostream& log);

// Expected NDCG@k when the relevant items sit at uniformly random positions
// among `n_candidates`.
double random_ranking_ndcg(std::size_t n_relevant, std::size_t n_candidates, std::size_t k);

}  // namespace fairrobust::cli

#endif  // FAIRROBUST_CLI_COMMANDS_HPP_
