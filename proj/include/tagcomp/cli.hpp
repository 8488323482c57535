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

// Subcommand bodies of the tagcomp tool. Each returns the process exit code:
// 0 success, 1 numerical failure, 2 input or configuration error.

#ifndef TAGCOMP_CLI_HPP_
#define TAGCOMP_CLI_HPP_

#include <filesystem>
#include <functional>
#include <iostream>
#include <string>

#include "tagcomp/dataset.hpp"
#include "tagcomp/evaluation.hpp"
#include "tagcomp/neighborhood.hpp"
#include "tagcomp/optimizer.hpp"
#include "tagcomp/pipeline.hpp"
#include "tagcomp/run_config.hpp"

namespace tagcomp::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitInput = 2;

// Output file names inside a run directory.
inline constexpr const char* kScoresFile = "scores.csv";
inline constexpr const char* kCheckpointFile = "checkpoint.bin";
inline constexpr const char* kTraceFile = "trace.csv";
inline constexpr const char* kConfigFile = "config.json";
inline constexpr const char* kHoldoutFile = "holdout.csv";
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kPrFile = "pr.csv";
inline constexpr const char* kSweepFile = "sweep.csv";
inline constexpr const char* kGraphFile = "graph.csv";

inline int guarded(const std::function<void()>& body, std::ostream& err) {
  try {
    body();
    return kExitOk;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

inline std::string absolute_or_empty(const std::string& p) {
  return p.empty() ? p : fs::absolute(p).lexically_normal().string();
}

inline void require_path(const std::string& p, const char* what) {
  if (p.empty()) throw InputError(std::string("missing required --") + what);
}

// Solves on the given data (after hiding holdout_frac of the observed
// entries unless holdout is off) and writes scores, checkpoint, trace and the
// resolved config into out_dir.
inline int cmd_complete(RunConfig cfg, std::ostream& err = std::cerr) {
  return guarded([&] {
    require_path(cfg.features, "features");
    require_path(cfg.tags, "tags");
    cfg.validate();
    cfg.features = absolute_or_empty(cfg.features);
    cfg.tags = absolute_or_empty(cfg.tags);
    cfg.out_dir = absolute_or_empty(cfg.out_dir);
    const Dataset ds = load_dataset(cfg.features, cfg.tags);
    const fs::path out = cfg.out_dir;
    fs::create_directories(out);

    TagObservations train = ds.tags;
    if (cfg.holdout) {
      auto [masked, split] =
          apply_holdout(ds.tags, cfg.pipeline.holdout_frac, cfg.pipeline.seed,
                        cfg.pipeline.holdout_per_row);
      write_holdout(out / kHoldoutFile, split);
      train = std::move(masked);
    }
    const SolveResult r = complete_tags(ds.features, train, cfg.pipeline);
    io::write_matrix_csv(out / kScoresFile, r.state.scores);
    save_checkpoint(out / kCheckpointFile, r.state);
    write_trace_csv(out / kTraceFile, r.trace);
    save_run_config(out / kConfigFile, cfg);
  }, err);
}

// Scores a completed run against its held-out entries and writes
// report.json and pr.csv.
inline int cmd_evaluate(const RunConfig& cli_cfg,
                        std::ostream& err = std::cerr) {
  return guarded([&] {
    require_path(cli_cfg.run_dir, "run-dir");
    const fs::path run = cli_cfg.run_dir;
    const fs::path cfg_path = run / kConfigFile;
    if (!fs::exists(cfg_path)) {
      throw InputError("missing run artifact: " + cfg_path.string());
    }
    const RunConfig cfg = load_run_config(cfg_path);
    const fs::path scores_path =
        cli_cfg.scores.empty() ? run / kScoresFile : fs::path(cli_cfg.scores);
    if (!fs::exists(scores_path)) {
      throw InputError("missing run artifact: " + scores_path.string());
    }
    if (!cfg.holdout && cli_cfg.holdout_file.empty()) {
      throw InputError(
          "run was completed without a holdout; pass --holdout-file to "
          "evaluate against recorded entries");
    }
    const Dataset ds = load_dataset(cfg.features, cfg.tags);

    HoldoutSplit split;
    const fs::path recorded = cli_cfg.holdout_file.empty()
                                  ? run / kHoldoutFile
                                  : fs::path(cli_cfg.holdout_file);
    if (fs::exists(recorded)) {
      split = load_holdout(recorded, ds.tags, cfg.pipeline.seed);
    } else {
      if (!cli_cfg.holdout_file.empty()) {
        throw InputError("missing holdout file: " + recorded.string());
      }
      split = apply_holdout(ds.tags, cfg.pipeline.holdout_frac,
                            cfg.pipeline.seed, cfg.pipeline.holdout_per_row)
                  .second;
      write_holdout(recorded, split);
    }

    const Matrix scores = io::read_matrix_csv(scores_path);
    if (scores.rows() != ds.tags.n() || scores.cols() != ds.tags.m()) {
      throw InputError(scores_path.string() + ": score matrix shape " +
                       std::to_string(scores.rows()) + "x" +
                       std::to_string(scores.cols()) +
                       " does not match the tag data");
    }
    const EvalReport rep = evaluate(scores, split, ds.tags);
    const fs::path out =
        cli_cfg.report_dir.empty() ? run : fs::path(cli_cfg.report_dir);
    write_report(out / kReportFile, out / kPrFile, rep);
  }, err);
}

// Writes sweep.csv ("value,map") plus the resolved config.
inline int cmd_sweep(RunConfig cfg, std::ostream& err = std::cerr) {
  return guarded([&] {
    require_path(cfg.features, "features");
    require_path(cfg.tags, "tags");
    cfg.validate();
    const auto param = parse_sweep_param(cfg.sweep_param);
    if (!param) {
      throw InputError("unknown sweep parameter '" + cfg.sweep_param +
                       "' (alpha, beta, kappa)");
    }
    cfg.features = absolute_or_empty(cfg.features);
    cfg.tags = absolute_or_empty(cfg.tags);
    cfg.out_dir = absolute_or_empty(cfg.out_dir);
    const Dataset ds = load_dataset(cfg.features, cfg.tags);
    const auto rows =
        sweep(ds.features, ds.tags, cfg.pipeline, *param, cfg.sweep_values);
    const fs::path out = cfg.out_dir;
    write_sweep_csv(out / kSweepFile, rows);
    save_run_config(out / kConfigFile, cfg);
  }, err);
}

// Writes features.csv, tags.csv and planted.csv (ground-truth scores).
inline int cmd_synth(const RunConfig& cfg, std::ostream& err = std::cerr) {
  return guarded([&] {
    const SyntheticData s =
        synthesize(cfg.synth_n, cfg.synth_d, cfg.synth_m, cfg.pipeline.kappa,
                   cfg.synth_noise, cfg.pipeline.seed);
    const fs::path out = cfg.out_dir;
    write_features(out / "features.csv", s.features);
    write_tags(out / "tags.csv", s.tags);
    io::write_matrix_csv(out / "planted.csv", s.planted);
  }, err);
}

inline int cmd_knn_dump(const RunConfig& cfg, std::ostream& err = std::cerr) {
  return guarded([&] {
    require_path(cfg.features, "features");
    const FeatureMatrix x =
        prepare_features(load_features(cfg.features), cfg.pipeline);
    const NeighborhoodGraph g = build_knn(x, cfg.pipeline.kappa,
                                          cfg.pipeline.include_self,
                                          cfg.pipeline.threads);
    write_graph_csv(fs::path(cfg.out_dir) / kGraphFile, g, x);
  }, err);
}

}  // namespace tagcomp::cli

#endif  // TAGCOMP_CLI_HPP_
