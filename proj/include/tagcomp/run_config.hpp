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

#ifndef TAGCOMP_RUN_CONFIG_HPP_
#define TAGCOMP_RUN_CONFIG_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagcomp/io.hpp"
#include "tagcomp/pipeline.hpp"

namespace tagcomp {

// Everything a CLI run depends on. Serialized with every default made
// explicit so that a run directory can be replayed from its config.json.
struct RunConfig {
  std::string features;
  std::string tags;
  std::string out_dir = "run";

  PipelineConfig pipeline;
  bool holdout = true;  // complete: hide holdout_frac of the entries first

  // evaluate
  std::string run_dir;
  std::string scores;        // override run_dir/scores.csv
  std::string holdout_file;  // override run_dir/holdout.csv
  std::string report_dir;    // defaults to run_dir

  // synth
  Index synth_n = 300;
  Index synth_d = 8;
  Index synth_m = 12;
  double synth_noise = 0.1;

  // sweep
  std::string sweep_param = "beta";
  std::vector<double> sweep_values = {0.1, 1.0, 10.0};

  void validate() const {
    pipeline.hp.validate();
    if (!(pipeline.holdout_frac > 0.0 && pipeline.holdout_frac < 1.0)) {
      throw InputError("config: holdout fraction must lie in (0,1)");
    }
    if (pipeline.kappa < 1) throw InputError("config: kappa >= 1 violated");
    if (pipeline.threads < 1) throw InputError("config: threads >= 1 violated");
  }
};

inline std::string to_string(InitMode m) {
  switch (m) {
    case InitMode::zeros: return "zeros";
    case InitMode::observed: return "observed";
    case InitMode::ridge_warm: return "ridge-warm";
  }
  return "?";
}

inline std::string to_string(StepMode m) {
  switch (m) {
    case StepMode::fixed_eta: return "fixed-eta";
    case StepMode::backtracking: return "backtracking";
    case StepMode::closed_form: return "closed-form";
  }
  return "?";
}

inline std::string to_string(BlockOrder o) {
  return o == BlockOrder::jacobi ? "jacobi" : "gauss-seidel";
}

inline InitMode parse_init_mode(const std::string& s) {
  if (s == "zeros") return InitMode::zeros;
  if (s == "observed") return InitMode::observed;
  if (s == "ridge-warm") return InitMode::ridge_warm;
  throw InputError("unknown init mode '" + s + "'");
}

inline StepMode parse_step_mode(const std::string& s) {
  if (s == "fixed-eta") return StepMode::fixed_eta;
  if (s == "backtracking") return StepMode::backtracking;
  if (s == "closed-form") return StepMode::closed_form;
  throw InputError("unknown step mode '" + s + "'");
}

inline BlockOrder parse_block_order(const std::string& s) {
  if (s == "jacobi") return BlockOrder::jacobi;
  if (s == "gauss-seidel") return BlockOrder::gauss_seidel;
  throw InputError("unknown block order '" + s + "'");
}

inline nlohmann::json to_json(const RunConfig& c) {
  const auto& p = c.pipeline;
  nlohmann::json j;
  j["features"] = c.features;
  j["tags"] = c.tags;
  j["out_dir"] = c.out_dir;
  j["alpha"] = p.hp.alpha;
  j["beta"] = p.hp.beta;
  j["eta"] = p.hp.eta;
  j["tol"] = p.hp.tol;
  j["max_iters"] = p.hp.max_iters;
  j["kappa"] = p.kappa;
  j["include_self"] = p.include_self;
  j["standardize"] = p.standardize;
  j["holdout"] = c.holdout;
  j["holdout_frac"] = p.holdout_frac;
  j["holdout_per_row"] = p.holdout_per_row;
  j["seed"] = p.seed;
  j["init"] = to_string(p.solver.init);
  j["step"] = to_string(p.solver.step);
  j["order"] = to_string(p.solver.order);
  j["threads"] = p.threads;
  j["micro_map"] = p.micro_map;
  j["sweep_param"] = c.sweep_param;
  j["sweep_values"] = c.sweep_values;
  return j;
}

inline RunConfig from_json(const nlohmann::json& j) {
  RunConfig c;
  auto& p = c.pipeline;
  try {
    c.features = j.value("features", c.features);
    c.tags = j.value("tags", c.tags);
    c.out_dir = j.value("out_dir", c.out_dir);
    p.hp.alpha = j.value("alpha", p.hp.alpha);
    p.hp.beta = j.value("beta", p.hp.beta);
    p.hp.eta = j.value("eta", p.hp.eta);
    p.hp.tol = j.value("tol", p.hp.tol);
    p.hp.max_iters = j.value("max_iters", p.hp.max_iters);
    p.kappa = j.value("kappa", p.kappa);
    p.include_self = j.value("include_self", p.include_self);
    p.standardize = j.value("standardize", p.standardize);
    c.holdout = j.value("holdout", c.holdout);
    p.holdout_frac = j.value("holdout_frac", p.holdout_frac);
    p.holdout_per_row = j.value("holdout_per_row", p.holdout_per_row);
    p.seed = j.value("seed", p.seed);
    p.solver.init = parse_init_mode(j.value("init", to_string(p.solver.init)));
    p.solver.step = parse_step_mode(j.value("step", to_string(p.solver.step)));
    p.solver.order =
        parse_block_order(j.value("order", to_string(p.solver.order)));
    p.threads = j.value("threads", p.threads);
    p.micro_map = j.value("micro_map", p.micro_map);
    c.sweep_param = j.value("sweep_param", c.sweep_param);
    c.sweep_values = j.value("sweep_values", c.sweep_values);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

inline void save_run_config(const std::filesystem::path& path,
                            const RunConfig& c) {
  auto out = io::open_output(path);
  out << to_json(c).dump(2) << '\n';
  if (!out) throw InputError("write failed: " + path.string());
}

}  // namespace tagcomp

#endif  // TAGCOMP_RUN_CONFIG_HPP_
