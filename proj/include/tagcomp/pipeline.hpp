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

// holdout -> kNN -> solve -> evaluate, and parameter sweeps built on it.

#ifndef TAGCOMP_PIPELINE_HPP_
#define TAGCOMP_PIPELINE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tagcomp/common.hpp"
#include "tagcomp/dataset.hpp"
#include "tagcomp/evaluation.hpp"
#include "tagcomp/model.hpp"
#include "tagcomp/neighborhood.hpp"
#include "tagcomp/optimizer.hpp"

namespace tagcomp {

struct PipelineConfig {
  Hyperparams hp;
  Index kappa = 5;
  bool include_self = false;
  bool standardize = false;
  double holdout_frac = 0.4;
  bool holdout_per_row = false;
  std::uint64_t seed = 42;
  SolverOptions solver;
  int threads = 1;
  bool micro_map = false;  // sweeps report micro-MAP instead of macro-MAP
};

struct PipelineResult {
  TagObservations masked;
  HoldoutSplit split;
  NeighborhoodGraph graph;
  SolveResult solution;
  EvalReport report;
};

inline FeatureMatrix prepare_features(const FeatureMatrix& features,
                                      const PipelineConfig& cfg) {
  features.validate();
  return cfg.standardize ? standardize(features) : features;
}

// Solves on `obs` as given (no holdout).
inline SolveResult complete_tags(const FeatureMatrix& features,
                                 const TagObservations& obs,
                                 const PipelineConfig& cfg,
                                 NeighborhoodGraph* graph_out = nullptr) {
  const FeatureMatrix x = prepare_features(features, cfg);
  obs.validate();
  NeighborhoodGraph graph =
      build_knn(x, cfg.kappa, cfg.include_self, cfg.threads);
  const Problem p{x, obs, graph, cfg.hp, cfg.threads};
  p.check();
  SolveResult r = run_alternating(p, cfg.solver);
  if (graph_out) *graph_out = std::move(graph);
  return r;
}

// Full evaluation protocol: hide a fraction of the observed entries, complete
// the rest, and score the hidden ones against their original signs.
inline PipelineResult run_pipeline(const FeatureMatrix& features,
                                   const TagObservations& obs,
                                   const PipelineConfig& cfg) {
  PipelineResult r;
  auto [masked, split] =
      apply_holdout(obs, cfg.holdout_frac, cfg.seed, cfg.holdout_per_row);
  r.masked = std::move(masked);
  r.split = std::move(split);
  r.solution = complete_tags(features, r.masked, cfg, &r.graph);
  r.report = evaluate(r.solution.state.scores, r.split, obs);
  return r;
}

enum class SweepParam { alpha, beta, kappa };

inline std::string to_string(SweepParam p) {
  switch (p) {
    case SweepParam::alpha: return "alpha";
    case SweepParam::beta: return "beta";
    case SweepParam::kappa: return "kappa";
  }
  return "?";
}

inline std::optional<SweepParam> parse_sweep_param(const std::string& s) {
  if (s == "alpha") return SweepParam::alpha;
  if (s == "beta") return SweepParam::beta;
  if (s == "kappa") return SweepParam::kappa;
  return std::nullopt;
}

struct SweepRow {
  double value = 0.0;
  double map = 0.0;
};

// Re-runs the pipeline once per value with every other setting (including
// the seed) fixed. Rows come back in input order.
inline std::vector<SweepRow> sweep(const FeatureMatrix& features,
                                   const TagObservations& obs,
                                   const PipelineConfig& base,
                                   SweepParam param,
                                   const std::vector<double>& values) {
  if (values.empty()) throw InputError("sweep: empty value list");
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (const double v : values) {
    PipelineConfig cfg = base;
    const std::string tag = to_string(param) + "=" + io::format_double(v);
    switch (param) {
      case SweepParam::alpha: cfg.hp.alpha = v; break;
      case SweepParam::beta: cfg.hp.beta = v; break;
      case SweepParam::kappa:
        if (v < 1.0 || v != static_cast<double>(static_cast<Index>(v))) {
          throw InputError("sweep " + tag + ": kappa must be a positive integer");
        }
        cfg.kappa = static_cast<Index>(v);
        break;
    }
    try {
      const PipelineResult r = run_pipeline(features, obs, cfg);
      rows.push_back({v, cfg.micro_map ? r.report.micro_map : r.report.map});
    } catch (const NumericalError& e) {
      throw NumericalError("sweep " + tag + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError("sweep " + tag + ": " + e.what());
    }
  }
  return rows;
}

inline void write_sweep_csv(const std::filesystem::path& path,
                            const std::vector<SweepRow>& rows) {
  auto out = io::open_output(path);
  out << "value,map\n";
  for (const auto& r : rows) {
    out << io::format_double(r.value) << ',' << io::format_double(r.map) << '\n';
  }
  if (!out) throw InputError("write failed: " + path.string());
}

}  // namespace tagcomp

#endif  // TAGCOMP_PIPELINE_HPP_
