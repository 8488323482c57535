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

#include "tagcomp/model.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "scalar_instance.hpp"

namespace tagcomp {
namespace {

using testing::ScalarInstance;

TEST(PredictLocal, Examples) {
  LocalPredictors w(1, Matrix::Zero(2, 2));
  const Vector x = (Vector(2) << 3.0, 4.0).finished();
  EXPECT_EQ(predict_local(w, 0, x), Vector::Zero(2));
  w[0] = Matrix::Identity(2, 2);
  EXPECT_EQ(predict_local(w, 0, x), x);
  LocalPredictors row(1, (Matrix(1, 2) << 2.0, -1.0).finished());
  EXPECT_DOUBLE_EQ(predict_local(row, 0, x)(0), 2.0);
}

TEST(PredictLocal, RejectsBadInput) {
  LocalPredictors w(2, Matrix::Zero(1, 2));
  EXPECT_THROW(predict_local(w, 2, Vector::Zero(2)), InputError);
  EXPECT_THROW(predict_local(w, 0, Vector::Zero(3)), InputError);
}

TEST(Objective, EmptyNeighborhoodAndNoObservations) {
  ScalarInstance in({1.0}, {{}});
  EXPECT_EQ(objective(in.s, in.problem()), 0.0);
}

TEST(Objective, SelfNeighborhoodLeavesOnlyComplexity) {
  ScalarInstance in({1.0}, {{0}});
  in.t(0) = 1.0;
  in.w(0) = 1.0;
  in.observe(0, 1.0);
  in.hp.alpha = 0.7;
  const auto terms = objective_terms(in.s, in.problem());
  EXPECT_EQ(terms.prediction, 0.0);
  EXPECT_EQ(terms.fidelity, 0.0);
  EXPECT_DOUBLE_EQ(objective(in.s, in.problem()), 0.7);
}

TEST(Objective, MatchesScalarLoops) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto in = oracle::random_instance(rng);
    const double got = objective(in.state, in.problem());
    const double want = oracle::brute_objective(in.state, in.features, in.tags,
                                                in.graph, in.hp);
    EXPECT_LE(std::abs(got - want), 1e-10 * std::max(1.0, std::abs(want)));
  }
}

TEST(Objective, IsNonNegative) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto in = oracle::random_instance(rng);
    EXPECT_GE(objective(in.state, in.problem()), 0.0);
  }
}

TEST(Objective, FidelityScalesWithBeta) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto in = oracle::random_instance(rng);
    const auto base = objective_terms(in.state, in.problem());
    in.hp.beta *= 2.0;
    const auto doubled = objective_terms(in.state, in.problem());
    EXPECT_DOUBLE_EQ(doubled.fidelity, 2.0 * base.fidelity);
    EXPECT_EQ(doubled.prediction, base.prediction);
    EXPECT_EQ(doubled.complexity, base.complexity);
  }
}

TEST(Objective, MaskedEntriesDoNotMatter) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    auto in = oracle::random_instance(rng);
    const double before = objective(in.state, in.problem());
    const Matrix gs = grad_scores(in.state, in.problem(), 0);
    for (Index i = 0; i < in.tags.n(); ++i) {
      for (Index j = 0; j < in.tags.m(); ++j) {
        if (in.tags.mask(i, j) == 0.0) in.tags.signs(i, j) *= -1.0;
      }
    }
    EXPECT_EQ(objective(in.state, in.problem()), before);
    EXPECT_EQ(grad_scores(in.state, in.problem(), 0), gs);
  }
}

TEST(GradScores, Example) {
  // Image 0 is the only neighbor of image 1, and W_1 x_0 = 3.
  ScalarInstance in({1.0, 1.0}, {{1}, {0}});
  in.w(1) = 3.0;
  in.t(0) = 1.0;
  in.observe(0, 1.0);
  in.hp.beta = 1.0;
  // 2 (1 - 3) + 2 (1 - 1)
  EXPECT_DOUBLE_EQ(grad_scores(in.s, in.problem(), 0)(0), -4.0);
}

TEST(GradScores, ZeroWithoutCouplings) {
  ScalarInstance in({1.0, 2.0}, {{}, {}});
  in.t(0) = 5.0;
  in.w(1) = 2.0;
  EXPECT_EQ(grad_scores(in.s, in.problem(), 0), Vector::Zero(1));
}

TEST(GradPredictor, Example) {
  ScalarInstance in({0.0, 2.0}, {{1}, {0}});
  in.t(1) = 1.0;
  in.w(0) = 1.0;
  in.hp.alpha = 0.0;
  // -2 (1 - 2) * 2
  EXPECT_DOUBLE_EQ(grad_predictor(in.s, in.problem(), 0)(0, 0), 4.0);
}

TEST(GradPredictor, ZeroWhenNeighborsArePredictedExactly) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    auto in = oracle::random_instance(rng);
    in.hp.alpha = 0.0;
    const auto& nb = in.graph.forward[0];
    for (const Index j : nb) {
      in.state.scores.row(j) =
          (in.state.predictors[0] * in.features.values.row(j).transpose())
              .transpose();
    }
    EXPECT_LE(grad_predictor(in.state, in.problem(), 0).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

TEST(Gradients, MatchCentralDifferences) {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 120; ++trial) {
    auto in = oracle::random_instance(rng);
    const Problem p = in.problem();
    auto f = [&] { return objective(in.state, p); };

    const Matrix fd_t = oracle::central_difference(in.state.scores, f);
    Matrix an_t(in.state.scores.rows(), in.state.scores.cols());
    for (Index i = 0; i < p.n(); ++i) {
      an_t.row(i) = grad_scores(in.state, p, i).transpose();
    }
    worst = std::max(worst, oracle::max_rel_error(an_t, fd_t));

    for (Index i = 0; i < p.n(); ++i) {
      Matrix& w = in.state.predictors[static_cast<std::size_t>(i)];
      const Matrix fd_w = oracle::central_difference(w, f);
      worst = std::max(worst, oracle::max_rel_error(
                                  grad_predictor(in.state, p, i), fd_w));
    }
  }
  EXPECT_LE(worst, 1e-5);
}

TEST(Problem, RejectsShapeMismatch) {
  ScalarInstance in({1.0, 1.0}, {{1}, {0}});
  ModelState bad = in.s;
  bad.predictors.pop_back();
  EXPECT_THROW(objective(bad, in.problem()), InputError);
  bad = in.s;
  bad.predictors[0] = Matrix::Zero(2, 1);
  EXPECT_THROW(objective(bad, in.problem()), InputError);
  EXPECT_THROW(grad_scores(in.s, in.problem(), 5), InputError);
  EXPECT_THROW(grad_predictor(in.s, in.problem(), -1), InputError);
}

}  // namespace
}  // namespace tagcomp
