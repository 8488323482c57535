// Copyright 2026 The tagcomp Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// tagcomp: complete, evaluate, sweep, synth, knn-dump.
//
// A resolved config.json from a previous run can be passed with --config;
// flags given explicitly on the command line override its values.

#include <iostream>
#include <string>
#include <string_view>

#include "CLI11.hpp"
#include "tagcomp/cli.hpp"

namespace {

using tagcomp::RunConfig;

// The --config value has to be known before options are bound, because the
// loaded file supplies the defaults.
std::string find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string_view a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return std::string(a.substr(9));
  }
  return {};
}

struct ModeStrings {
  std::string init, step, order;
};

void add_model_options(CLI::App* sub, RunConfig& c, ModeStrings& modes) {
  auto& p = c.pipeline;
  sub->add_option("--alpha", p.hp.alpha, "predictor complexity weight")
      ->capture_default_str();
  sub->add_option("--beta", p.hp.beta, "observed-tag fidelity weight")
      ->capture_default_str();
  sub->add_option("--eta", p.hp.eta, "descent step")->capture_default_str();
  sub->add_option("--tol", p.hp.tol, "relative objective change to stop")
      ->capture_default_str();
  sub->add_option("--max-iters", p.hp.max_iters)->capture_default_str();
  sub->add_option("--kappa", p.kappa, "neighborhood size")
      ->capture_default_str();
  sub->add_flag("--include-self,!--exclude-self", p.include_self,
                "put each image in its own neighborhood");
  sub->add_flag("--standardize,!--no-standardize", p.standardize,
                "zero-mean unit-variance features");
  sub->add_option("--holdout-frac", p.holdout_frac,
                  "fraction of observed entries hidden for evaluation")
      ->capture_default_str();
  sub->add_flag("--holdout-per-row,!--holdout-global", p.holdout_per_row,
                "stratify the holdout by image");
  sub->add_option("--seed", p.seed)->capture_default_str();
  sub->add_option("--init", modes.init, "zeros | observed | ridge-warm")
      ->capture_default_str();
  sub->add_option("--step", modes.step,
                  "fixed-eta | backtracking | closed-form")
      ->capture_default_str();
  sub->add_option("--order", modes.order, "jacobi | gauss-seidel")
      ->capture_default_str();
  sub->add_option("--threads", p.threads)->capture_default_str();
  sub->add_flag("--micro-map", p.micro_map, "sweeps report pooled MAP");
}

void add_data_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--features", c.features, "features CSV");
  sub->add_option("--tags", c.tags, "tags file");
  sub->add_option("--out", c.out_dir, "output directory")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  const std::string config_path = find_config_arg(argc, argv);
  if (!config_path.empty()) {
    try {
      cfg = tagcomp::load_run_config(config_path);
    } catch (const tagcomp::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return tagcomp::cli::kExitInput;
    }
  }
  ModeStrings modes{tagcomp::to_string(cfg.pipeline.solver.init),
                    tagcomp::to_string(cfg.pipeline.solver.step),
                    tagcomp::to_string(cfg.pipeline.solver.order)};

  CLI::App app{"Tag completion by local linear learning"};
  app.require_subcommand(1);
  std::string ignored_config;
  app.add_option("--config", ignored_config,
                 "resolved config.json of an earlier run");

  auto* complete = app.add_subcommand("complete", "complete missing tags");
  add_data_options(complete, cfg);
  add_model_options(complete, cfg, modes);
  complete->add_flag("!--no-holdout", cfg.holdout,
                     "solve on all observed entries");

  auto* evaluate = app.add_subcommand("evaluate", "score a completed run");
  evaluate->add_option("--run-dir", cfg.run_dir, "output of `complete`")
      ->required();
  evaluate->add_option("--scores", cfg.scores, "score matrix override");
  evaluate->add_option("--holdout-file", cfg.holdout_file,
                       "recorded holdout pairs");
  evaluate->add_option("--report-dir", cfg.report_dir,
                       "where to write report.json and pr.csv");

  auto* sweep = app.add_subcommand("sweep", "parameter sensitivity table");
  add_data_options(sweep, cfg);
  add_model_options(sweep, cfg, modes);
  sweep->add_option("--param", cfg.sweep_param, "alpha | beta | kappa")
      ->capture_default_str();
  sweep->add_option("--values", cfg.sweep_values, "comma separated values")
      ->delimiter(',')
      ->capture_default_str();

  auto* synth = app.add_subcommand("synth", "write a planted dataset");
  synth->add_option("--n", cfg.synth_n)->capture_default_str();
  synth->add_option("--d", cfg.synth_d)->capture_default_str();
  synth->add_option("--m", cfg.synth_m)->capture_default_str();
  synth->add_option("--kappa", cfg.pipeline.kappa)->capture_default_str();
  synth->add_option("--noise", cfg.synth_noise)->capture_default_str();
  synth->add_option("--seed", cfg.pipeline.seed)->capture_default_str();
  synth->add_option("--out", cfg.out_dir)->capture_default_str();

  auto* knn = app.add_subcommand("knn-dump", "write the neighborhood graph");
  knn->add_option("--features", cfg.features)->required();
  knn->add_option("--kappa", cfg.pipeline.kappa)->capture_default_str();
  knn->add_flag("--include-self", cfg.pipeline.include_self);
  knn->add_flag("--standardize", cfg.pipeline.standardize);
  knn->add_option("--threads", cfg.pipeline.threads)->capture_default_str();
  knn->add_option("--out", cfg.out_dir)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : tagcomp::cli::kExitInput;
  }

  try {
    cfg.pipeline.solver.init = tagcomp::parse_init_mode(modes.init);
    cfg.pipeline.solver.step = tagcomp::parse_step_mode(modes.step);
    cfg.pipeline.solver.order = tagcomp::parse_block_order(modes.order);
  } catch (const tagcomp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return tagcomp::cli::kExitInput;
  }

  if (*complete) return tagcomp::cli::cmd_complete(cfg);
  if (*evaluate) return tagcomp::cli::cmd_evaluate(cfg);
  if (*sweep) return tagcomp::cli::cmd_sweep(cfg);
  if (*synth) return tagcomp::cli::cmd_synth(cfg);
  if (*knn) return tagcomp::cli::cmd_knn_dump(cfg);
  return tagcomp::cli::kExitInput;
}
