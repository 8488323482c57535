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

// Local linear tag-score model.
//
// Every image i owns a linear map W_i (m x d) that predicts the scores of the
// images in its neighborhood N_i from their features. The scores t and the
// maps W are learned jointly by minimizing
//
//   g(t, W) = sum_i [ sum_{j in N_i} |t_j - W_i x_j|^2        (prediction)
//                     + alpha |W_i|_F^2                       (complexity)
//                     + beta (t_i - s_i)' diag(v_i) (t_i - s_i) ]  (fidelity)
//
// where s_i are the observed signs and v_i the availability mask.

#ifndef TAGCOMP_MODEL_HPP_
#define TAGCOMP_MODEL_HPP_

#include <string>
#include <vector>

#include "tagcomp/common.hpp"
#include "tagcomp/neighborhood.hpp"

namespace tagcomp {

// Read-only bundle of everything the objective depends on besides the state.
struct Problem {
  const FeatureMatrix& features;
  const TagObservations& tags;
  const NeighborhoodGraph& graph;
  Hyperparams hp;
  int threads = 1;

  Index n() const { return features.n(); }
  Index d() const { return features.d(); }
  Index m() const { return tags.m(); }

  void check(bool allow_zero_step = false) const {
    if (tags.n() != features.n()) {
      throw InputError("problem: feature and tag row counts differ");
    }
    if (graph.n() != features.n()) {
      throw InputError("problem: graph size differs from feature rows");
    }
    hp.validate(allow_zero_step);
  }

  void check(const ModelState& state, bool allow_zero_step = false) const {
    check(allow_zero_step);
    if (state.scores.rows() != n() || state.scores.cols() != m() ||
        static_cast<Index>(state.predictors.size()) != n()) {
      throw InputError("model state: shape mismatch with data");
    }
    for (const auto& w : state.predictors) {
      if (w.rows() != m() || w.cols() != d()) {
        throw InputError("model state: predictor shape mismatch");
      }
    }
  }

  auto x(Index i) const { return features.values.row(i).transpose(); }
};

inline void check_index(Index i, Index n) {
  if (i < 0 || i >= n) {
    throw InputError("index " + std::to_string(i) + " out of range [0," +
                     std::to_string(n) + ")");
  }
}

// f_i(x) = W_i x.
inline Vector predict_local(const LocalPredictors& predictors, Index i,
                            const Vector& x) {
  check_index(i, static_cast<Index>(predictors.size()));
  const Matrix& w = predictors[static_cast<std::size_t>(i)];
  if (x.size() != w.cols()) {
    throw InputError("predict_local: feature dimension mismatch");
  }
  return w * x;
}

struct ObjectiveTerms {
  double prediction = 0.0;
  double complexity = 0.0;
  double fidelity = 0.0;

  double total() const { return prediction + complexity + fidelity; }
};

namespace detail {

// sum_j v_ij (t_ij - s_ij)^2 over observed entries only; masked entries are
// skipped rather than multiplied so that their sign value is irrelevant.
inline double masked_sq_error(const ModelState& state, const Problem& p,
                              Index i) {
  double acc = 0.0;
  for (Index j = 0; j < p.m(); ++j) {
    if (p.tags.mask(i, j) == 0.0) continue;
    const double r = state.scores(i, j) - p.tags.signs(i, j);
    acc += r * r;
  }
  return acc;
}

inline double prediction_error(const ModelState& state, const Problem& p,
                               Index i) {
  const Matrix& w = state.predictors[static_cast<std::size_t>(i)];
  double acc = 0.0;
  for (const Index j : p.graph.forward[static_cast<std::size_t>(i)]) {
    acc += (state.scores.row(j).transpose() - w * p.x(j)).squaredNorm();
  }
  return acc;
}

}  // namespace detail

// The three terms of g, each summed over images in ascending order.
inline ObjectiveTerms objective_terms(const ModelState& state,
                                      const Problem& p) {
  p.check(state);
  const Index n = p.n();
  std::vector<double> pred(static_cast<std::size_t>(n));
  parallel_for(n, p.threads, [&](Index i) {
    pred[static_cast<std::size_t>(i)] = detail::prediction_error(state, p, i);
  });
  ObjectiveTerms terms;
  for (Index i = 0; i < n; ++i) {
    terms.prediction += pred[static_cast<std::size_t>(i)];
    terms.complexity +=
        p.hp.alpha * state.predictors[static_cast<std::size_t>(i)].squaredNorm();
    terms.fidelity += p.hp.beta * detail::masked_sq_error(state, p, i);
  }
  return terms;
}

inline double objective(const ModelState& state, const Problem& p) {
  return objective_terms(state, p).total();
}

// d g / d t_i = 2 sum_{k : i in N_k} (t_i - W_k x_i) + 2 beta v_i .* (t_i - s_i)
inline Vector grad_scores(const ModelState& state, const Problem& p, Index i) {
  check_index(i, p.n());
  const Vector t = state.scores.row(i).transpose();
  const auto x = p.x(i);
  Vector g = Vector::Zero(p.m());
  for (const Index k : p.graph.reverse[static_cast<std::size_t>(i)]) {
    g.noalias() += 2.0 * (t - state.predictors[static_cast<std::size_t>(k)] * x);
  }
  for (Index j = 0; j < p.m(); ++j) {
    if (p.tags.mask(i, j) == 0.0) continue;
    g(j) += 2.0 * p.hp.beta * (t(j) - p.tags.signs(i, j));
  }
  return g;
}

// d g / d W_i = -2 sum_{j in N_i} (t_j - W_i x_j) x_j' + 2 alpha W_i
inline Matrix grad_predictor(const ModelState& state, const Problem& p,
                             Index i) {
  check_index(i, p.n());
  const Matrix& w = state.predictors[static_cast<std::size_t>(i)];
  Matrix g = 2.0 * p.hp.alpha * w;
  for (const Index j : p.graph.forward[static_cast<std::size_t>(i)]) {
    const auto xj = p.x(j);
    const Vector r = state.scores.row(j).transpose() - w * xj;
    g.noalias() -= 2.0 * r * xj.transpose();
  }
  return g;
}

}  // namespace tagcomp

#endif  // TAGCOMP_MODEL_HPP_
