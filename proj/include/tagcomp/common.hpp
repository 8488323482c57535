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

#ifndef TAGCOMP_COMMON_HPP_
#define TAGCOMP_COMMON_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <exception>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace tagcomp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files, bad parameters, shape mismatches.
class InputError : public Error {
 public:
  using Error::Error;
};

// Divergence, non-finite updates, singular linear systems.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Per-image visual features, row i = x_i.
struct FeatureMatrix {
  Matrix values;

  Index n() const { return values.rows(); }
  Index d() const { return values.cols(); }

  void validate() const {
    if (n() < 1) throw InputError("feature matrix: n >= 1 violated");
    if (d() < 1) throw InputError("feature matrix: d >= 1 violated");
    if (!values.allFinite()) {
      throw InputError("feature matrix: non-finite value");
    }
  }
};

// Signed tag matrix plus availability mask. Entries with mask 0 are carried
// (placeholder +1 by convention) and never reach any objective or gradient.
struct TagObservations {
  Matrix signs;
  Matrix mask;

  Index n() const { return signs.rows(); }
  Index m() const { return signs.cols(); }

  Index observed_count() const {
    return static_cast<Index>((mask.array() != 0.0).count());
  }

  void validate() const {
    if (signs.rows() != mask.rows() || signs.cols() != mask.cols()) {
      throw InputError("tag observations: signs/mask shape mismatch");
    }
    if (m() < 1) throw InputError("tag observations: m >= 1 violated");
    for (Index i = 0; i < n(); ++i) {
      for (Index j = 0; j < m(); ++j) {
        const double s = signs(i, j);
        const double v = mask(i, j);
        if (s != 1.0 && s != -1.0) {
          throw InputError("tag observations: sign outside {+1,-1}");
        }
        if (v != 0.0 && v != 1.0) {
          throw InputError("tag observations: mask outside {0,1}");
        }
      }
    }
  }

  bool operator==(const TagObservations& o) const {
    return signs == o.signs && mask == o.mask;
  }
};

struct HoldoutSplit {
  Matrix holdout_mask;
  double fraction = 0.4;
  std::uint64_t seed = 42;

  Index count() const {
    return static_cast<Index>((holdout_mask.array() != 0.0).count());
  }
  bool held_out(Index i, Index j) const { return holdout_mask(i, j) != 0.0; }
};

// n x m tag scores, row i = t_i.
using ScoreMatrix = Matrix;
// n matrices of shape m x d.
using LocalPredictors = std::vector<Matrix>;

struct ModelState {
  ScoreMatrix scores;
  LocalPredictors predictors;

  Index n() const { return scores.rows(); }
  Index m() const { return scores.cols(); }
  Index d() const { return predictors.empty() ? 0 : predictors.front().cols(); }

  bool operator==(const ModelState& o) const {
    if (scores.rows() != o.scores.rows() || scores.cols() != o.scores.cols() ||
        scores != o.scores || predictors.size() != o.predictors.size()) {
      return false;
    }
    for (std::size_t i = 0; i < predictors.size(); ++i) {
      if (predictors[i].rows() != o.predictors[i].rows() ||
          predictors[i].cols() != o.predictors[i].cols() ||
          predictors[i] != o.predictors[i]) {
        return false;
      }
    }
    return true;
  }
};

struct Hyperparams {
  double alpha = 1.0;  // predictor complexity weight
  double beta = 1.0;   // observed-tag fidelity weight
  double eta = 1e-3;   // descent step
  int max_iters = 200;
  double tol = 1e-6;   // relative objective decrease for stopping

  // A single sweep is well defined for eta = 0; the solver is not.
  void validate(bool allow_zero_step = false) const {
    if (!(alpha >= 0.0)) throw InputError("hyperparams: alpha >= 0 violated");
    if (!(beta >= 0.0)) throw InputError("hyperparams: beta >= 0 violated");
    if (!(eta > 0.0) && !(allow_zero_step && eta == 0.0)) {
      throw InputError("hyperparams: eta > 0 violated");
    }
    if (!(tol > 0.0)) throw InputError("hyperparams: tol > 0 violated");
    if (max_iters < 1) throw InputError("hyperparams: max_iters >= 1 violated");
  }
};

// Independent RNG stream derived from the run seed and a stream name, so that
// e.g. the holdout draw does not shift when synthesis consumes more numbers.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::string_view name) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h),
                    static_cast<std::uint32_t>(h >> 32)};
  return std::mt19937_64(seq);
}

// Runs body(i) for i in [0, count) across `threads` workers using contiguous
// chunks. Callers only write to slot i, so results do not depend on the
// thread count.
template <class Body>
void parallel_for(Index count, int threads, Body&& body) {
  const Index workers =
      std::max<Index>(1, std::min<Index>(threads, count));
  if (workers <= 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  const Index chunk = (count + workers - 1) / workers;
  for (Index w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const Index lo = w * chunk;
        const Index hi = std::min(count, lo + chunk);
        for (Index i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace tagcomp

#endif  // TAGCOMP_COMMON_HPP_
