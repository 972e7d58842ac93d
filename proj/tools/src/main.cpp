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

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairrobust_cli/commands.hpp"

namespace {

using fairrobust::cli::RunConfig;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> op;
  std::optional<std::string> kind;
  std::optional<std::string> lambda;
  std::optional<std::string> epochs;
  std::optional<std::string> patience;
  std::optional<std::string> min_delta;
  std::optional<std::string> gamma;
  std::size_t jobs = 1;
  std::vector<std::string> settings;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Config file with key = value lines")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Seed for data generation, training and the attack");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--op", f.op, "Fairness operationalization")
      ->check(CLI::IsMember({"cp", "cs", "pe", "pv"}));
  cmd->add_option("--kind", f.kind, "Perturbation kind")->check(CLI::IsMember({"add", "del"}));
  cmd->add_option("--lambda", f.lambda, "Weight of the distance term");
  cmd->add_option("--epochs", f.epochs, "Training epochs (train) or attack epochs");
  cmd->add_option("--patience", f.patience, "Early-stopping patience");
  cmd->add_option("--min-delta", f.min_delta, "Minimum improvement of delta in the window");
  cmd->add_option("--gamma", f.gamma, "Edge budget ('none' for unbounded)");
  cmd->add_option("--jobs", f.jobs, "Parallel attack runs (sweep)")->check(CLI::PositiveNumber);
  cmd->add_option("--set", f.settings, "Any config key as key=value; repeatable");
}

RunConfig resolve(const Flags& f, bool training) {
  RunConfig cfg = f.config.empty() ? fairrobust::cli::default_run_config()
                                   : fairrobust::cli::load_run_config(f.config);
  for (const auto& kv : f.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw fairrobust::ConfigError("--set expects key=value");
    fairrobust::cli::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  auto set = [&](const char* key, const std::optional<std::string>& v) {
    if (v) fairrobust::cli::apply_setting(cfg, key, *v);
  };
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.out = *f.out;
  set("attack.op", f.op);
  set("attack.kind", f.kind);
  set("attack.lambda", f.lambda);
  set(training ? "model.epochs" : "attack.epochs", f.epochs);
  set(training ? "model.patience" : "attack.patience", f.patience);
  set("attack.min_delta", f.min_delta);
  set("attack.gamma", f.gamma);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robustness in fairness of graph recommenders under edge perturbations"};
  app.require_subcommand(1);
  Flags flags;
  auto* prepare = app.add_subcommand("prepare", "Load or generate a dataset and its partitions");
  auto* train = app.add_subcommand("train", "Train the recommender on the prepared dataset");
  auto* attack = app.add_subcommand("attack", "Run one perturbation attack and report");
  auto* sweep = app.add_subcommand("sweep", "Attack with every operationalization and kind");
  auto* report = app.add_subcommand("report", "Rebuild reports from stored run artifacts");
  for (auto* cmd : {prepare, train, attack, sweep, report}) add_flags(cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    const RunConfig cfg = resolve(flags, train->parsed());
    if (prepare->parsed()) {
      fairrobust::cli::cmd_prepare(cfg, std::cout);
    } else if (train->parsed()) {
      fairrobust::cli::cmd_train(cfg, std::cout);
    } else if (attack->parsed()) {
      fairrobust::cli::cmd_attack(cfg, std::cout);
    } else if (sweep->parsed()) {
      const auto entries = fairrobust::cli::cmd_sweep(cfg, flags.jobs, std::cout);
      std::size_t failed = 0;
      for (const auto& e : entries) failed += e.summary ? 0 : 1;
      if (failed > 0) {
        std::cerr << failed << " of " << entries.size() << " runs failed\n";
        return 3;
      }
    } else if (report->parsed()) {
      fairrobust::cli::cmd_report(cfg, std::cout);
    }
  } catch (const fairrobust::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const fairrobust::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
