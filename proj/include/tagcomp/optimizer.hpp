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

// Alternating minimization of the local linear objective: one sweep over all
// score vectors t_i, then one sweep over all predictors W_i, repeated until
// the objective stabilizes.
//
// Three step rules are provided:
//   fixed_eta     plain gradient steps with the configured eta; fails loudly
//                 on divergence instead of shrinking the step.
//   backtracking  gradient steps starting at eta, halved (at most 30 times)
//                 until the sweep does not increase the objective. Along a
//                 block gradient G the objective is the quadratic
//                 g(s) = g(0) - s |G|^2 + s^2 b, so the test is s b <= |G|^2
//                 and needs no trial evaluations.
//   closed_form   exact block minimizers (a per-coordinate weighted mean for
//                 t_i, ridge regression for W_i).
//
// The t-gradient of image i only involves t_i and the W_k, and the
// W-gradient of W_i only involves W_i and the t_j, so all updates inside a
// block are independent of each other.

#ifndef TAGCOMP_OPTIMIZER_HPP_
#define TAGCOMP_OPTIMIZER_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "tagcomp/common.hpp"
#include "tagcomp/io.hpp"
#include "tagcomp/model.hpp"

namespace tagcomp {

enum class InitMode { zeros, observed, ridge_warm };
enum class StepMode { fixed_eta, backtracking, closed_form };
// Within-block update order. Both give identical results because the updates
// inside a block are decoupled; jacobi may use several threads.
enum class BlockOrder { jacobi, gauss_seidel };

struct SolverOptions {
  InitMode init = InitMode::observed;
  StepMode step = StepMode::backtracking;
  BlockOrder order = BlockOrder::jacobi;
  int max_halvings = 30;
  double divergence_factor = 10.0;
};

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  ObjectiveTerms terms;
  double max_delta = 0.0;
  double seconds = 0.0;
};

struct IterationTrace {
  ObjectiveTerms initial;
  std::vector<IterationRecord> records;
  bool converged = false;
};

// Exact minimizer of g in t_i with everything else fixed:
//   t_ij = (sum_{k in R_i} (W_k x_i)_j + beta v_ij s_ij) / (|R_i| + beta v_ij).
// Coordinates with a zero denominator do not appear in g and keep their
// current value.
inline Vector closed_form_scores(const ModelState& state, const Problem& p,
                                 Index i) {
  check_index(i, p.n());
  const auto& rev = p.graph.reverse[static_cast<std::size_t>(i)];
  const auto x = p.x(i);
  Vector num = Vector::Zero(p.m());
  for (const Index k : rev) {
    num.noalias() += state.predictors[static_cast<std::size_t>(k)] * x;
  }
  const double c = static_cast<double>(rev.size());
  Vector t = state.scores.row(i).transpose();
  for (Index j = 0; j < p.m(); ++j) {
    const bool seen = p.tags.mask(i, j) != 0.0;
    const double den = c + (seen ? p.hp.beta : 0.0);
    if (den <= 0.0) continue;
    const double fid = seen ? p.hp.beta * p.tags.signs(i, j) : 0.0;
    t(j) = (num(j) + fid) / den;
  }
  return t;
}

// Ridge regression of the neighbors' scores on their features:
//   W_i = T X' (X X' + alpha I_d)^{-1}
// with X (d x kappa) and T (m x kappa) stacking the neighbors as columns.
// For alpha > 0 and kappa < d the equivalent kernel form
// T (X'X + alpha I_kappa)^{-1} X' is solved instead.
inline Matrix closed_form_predictor(const ModelState& state, const Problem& p,
                                    Index i) {
  check_index(i, p.n());
  const auto& nb = p.graph.forward[static_cast<std::size_t>(i)];
  const Index k = static_cast<Index>(nb.size());
  Matrix xs(p.d(), k);
  Matrix ts(p.m(), k);
  for (Index c = 0; c < k; ++c) {
    const Index j = nb[static_cast<std::size_t>(c)];
    xs.col(c) = p.x(j);
    ts.col(c) = state.scores.row(j).transpose();
  }
  const double alpha = p.hp.alpha;
  if (alpha > 0.0) {
    if (k < p.d()) {
      Matrix gram = xs.transpose() * xs;
      gram.diagonal().array() += alpha;
      Eigen::LLT<Matrix> llt(gram);
      if (llt.info() != Eigen::Success) {
        throw NumericalError("closed_form_predictor: factorization failed");
      }
      return llt.solve(ts.transpose()).transpose() * xs.transpose();
    }
    Matrix gram = xs * xs.transpose();
    gram.diagonal().array() += alpha;
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("closed_form_predictor: factorization failed");
    }
    return llt.solve(xs * ts.transpose()).transpose();
  }
  const Matrix gram = xs * xs.transpose();
  Eigen::ColPivHouseholderQR<Matrix> qr(gram);
  if (qr.rank() < p.d()) {
    throw NumericalError(
        "closed_form_predictor: singular system for image " +
        std::to_string(i) + " (alpha = 0 and rank-deficient neighbors)");
  }
  return qr.solve(xs * ts.transpose()).transpose();
}

inline ModelState init_state(const Problem& p, InitMode mode) {
  p.check();
  ModelState s;
  s.predictors.assign(static_cast<std::size_t>(p.n()),
                      Matrix::Zero(p.m(), p.d()));
  if (mode == InitMode::zeros) {
    s.scores = Matrix::Zero(p.n(), p.m());
    return s;
  }
  s.scores = (p.tags.mask.array() != 0.0)
                 .select(p.tags.signs, Matrix::Zero(p.n(), p.m()));
  if (mode == InitMode::ridge_warm) {
    LocalPredictors warm(static_cast<std::size_t>(p.n()));
    parallel_for(p.n(), p.threads, [&](Index i) {
      warm[static_cast<std::size_t>(i)] = closed_form_predictor(s, p, i);
    });
    s.predictors = std::move(warm);
  }
  return s;
}

namespace detail {

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw NumericalError(std::string("non-finite ") + what +
                         " update (step size too large?)");
  }
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

// All score gradients against the current state, row i = grad_scores(i).
inline Matrix score_gradients(const ModelState& s, const Problem& p) {
  Matrix g(p.n(), p.m());
  parallel_for(p.n(), p.threads, [&](Index i) {
    g.row(i) = grad_scores(s, p, i).transpose();
  });
  return g;
}

// t_i <- t_i - step * grad_scores(i) for all i.
inline void score_sweep(ModelState& s, const Problem& p, double step,
                        BlockOrder order) {
  if (order == BlockOrder::gauss_seidel) {
    for (Index i = 0; i < p.n(); ++i) {
      const Vector g = grad_scores(s, p, i);
      s.scores.row(i) -= step * g.transpose();
    }
  } else {
    const Matrix g = score_gradients(s, p);
    s.scores -= step * g;
  }
  require_finite(s.scores, "score");
}

// W_i <- base.W_i - step * grad_predictor(base, i) for all i, written to out.
inline void predictor_sweep(const ModelState& base, ModelState& out,
                            const Problem& p, double step, BlockOrder order) {
  auto update = [&](Index i) {
    const auto u = static_cast<std::size_t>(i);
    const Matrix g = grad_predictor(base, p, i);
    out.predictors[u] = base.predictors[u] - step * g;
  };
  if (order == BlockOrder::gauss_seidel) {
    for (Index i = 0; i < p.n(); ++i) update(i);
  } else {
    parallel_for(p.n(), p.threads, update);
  }
  for (const auto& w : out.predictors) require_finite(w, "predictor");
}

inline double predictor_delta(const LocalPredictors& a,
                              const LocalPredictors& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, max_abs_diff(a[i], b[i]));
  }
  return d;
}

// Coefficients of g(s) = g(0) - s * slope + s^2 * curvature along -G.
struct LineQuadratic {
  double slope = 0.0;
  double curvature = 0.0;
  double max_abs = 0.0;  // largest |G| entry
};

// Score block: t_i appears in |R_i| prediction terms and in the fidelity
// term on its observed coordinates.
inline LineQuadratic score_line(const Matrix& g, const Problem& p) {
  LineQuadratic q;
  for (Index i = 0; i < p.n(); ++i) {
    const double c =
        static_cast<double>(p.graph.reverse[static_cast<std::size_t>(i)].size());
    for (Index j = 0; j < p.m(); ++j) {
      const double gij = g(i, j);
      const double v = p.tags.mask(i, j) != 0.0 ? p.hp.beta : 0.0;
      q.slope += gij * gij;
      q.curvature += (c + v) * gij * gij;
    }
  }
  q.max_abs = g.size() == 0 ? 0.0 : g.cwiseAbs().maxCoeff();
  return q;
}

// Predictor block: sum_i sum_{j in N_i} |G_i x_j|^2 + alpha |G_i|^2. The
// per-image gradients are not kept; sums run in ascending image order.
inline LineQuadratic predictor_line(const ModelState& s, const Problem& p) {
  const auto n = static_cast<std::size_t>(p.n());
  std::vector<double> slope(n), curv(n), peak(n);
  parallel_for(p.n(), p.threads, [&](Index i) {
    const auto u = static_cast<std::size_t>(i);
    const Matrix g = grad_predictor(s, p, i);
    double c = p.hp.alpha * g.squaredNorm();
    for (const Index j : p.graph.forward[u]) c += (g * p.x(j)).squaredNorm();
    slope[u] = g.squaredNorm();
    curv[u] = c;
    peak[u] = g.size() == 0 ? 0.0 : g.cwiseAbs().maxCoeff();
  });
  LineQuadratic q;
  for (std::size_t i = 0; i < n; ++i) {
    q.slope += slope[i];
    q.curvature += curv[i];
    q.max_abs = std::max(q.max_abs, peak[i]);
  }
  return q;
}

// First step eta / 2^h, h <= max_halvings, that does not increase the
// objective; 0 when none does.
inline double backtrack_step(const LineQuadratic& q, double eta,
                             int max_halvings) {
  double step = eta;
  for (int h = 0; h <= max_halvings; ++h, step *= 0.5) {
    if (step * q.curvature <= q.slope) return step;
  }
  return 0.0;
}

}  // namespace detail

// One fixed-step sweep over all t_i.
inline ModelState step_scores(const ModelState& state, const Problem& p,
                              BlockOrder order = BlockOrder::jacobi) {
  p.check(state, true);
  ModelState next = state;
  detail::score_sweep(next, p, p.hp.eta, order);
  return next;
}

// One fixed-step sweep over all W_i.
inline ModelState step_predictors(const ModelState& state, const Problem& p,
                                  BlockOrder order = BlockOrder::jacobi) {
  p.check(state, true);
  ModelState next = state;
  detail::predictor_sweep(state, next, p, p.hp.eta, order);
  return next;
}

// Alternates t and W sweeps from `state` until the relative objective change
// |g_prev - g| / g_prev falls below tol or max_iters is reached.
inline IterationTrace solve(ModelState& state, const Problem& p,
                            const SolverOptions& opt = {}) {
  using clock = std::chrono::steady_clock;
  p.check(state);
  const auto start = clock::now();
  IterationTrace trace;
  trace.initial = objective_terms(state, p);
  const double initial = trace.initial.total();
  double prev = initial;
  const double eta = p.hp.eta;

  for (int it = 1; it <= p.hp.max_iters; ++it) {
    double delta = 0.0;
    switch (opt.step) {
      case StepMode::fixed_eta: {
        const Matrix t0 = state.scores;
        detail::score_sweep(state, p, eta, opt.order);
        delta = detail::max_abs_diff(state.scores, t0);
        const LocalPredictors w0 = state.predictors;
        detail::predictor_sweep(state, state, p, eta, opt.order);
        delta = std::max(delta, detail::predictor_delta(state.predictors, w0));
        break;
      }
      case StepMode::backtracking: {
        const Matrix g = detail::score_gradients(state, p);
        const auto qt = detail::score_line(g, p);
        double step = detail::backtrack_step(qt, eta, opt.max_halvings);
        if (step > 0.0) {
          state.scores -= step * g;
          detail::require_finite(state.scores, "score");
        }
        delta = step * qt.max_abs;
        const auto qw = detail::predictor_line(state, p);
        step = detail::backtrack_step(qw, eta, opt.max_halvings);
        if (step > 0.0) {
          detail::predictor_sweep(state, state, p, step, opt.order);
        }
        delta = std::max(delta, step * qw.max_abs);
        break;
      }
      case StepMode::closed_form: {
        const Matrix t0 = state.scores;
        for (Index i = 0; i < p.n(); ++i) {
          state.scores.row(i) = closed_form_scores(state, p, i).transpose();
        }
        detail::require_finite(state.scores, "score");
        delta = detail::max_abs_diff(state.scores, t0);
        LocalPredictors next(static_cast<std::size_t>(p.n()));
        parallel_for(p.n(), p.threads, [&](Index i) {
          next[static_cast<std::size_t>(i)] = closed_form_predictor(state, p, i);
        });
        for (const auto& w : next) detail::require_finite(w, "predictor");
        delta = std::max(delta, detail::predictor_delta(next, state.predictors));
        state.predictors = std::move(next);
        break;
      }
    }

    IterationRecord rec;
    rec.iter = it;
    rec.terms = objective_terms(state, p);
    rec.objective = rec.terms.total();
    rec.max_delta = delta;
    rec.seconds =
        std::chrono::duration<double>(clock::now() - start).count();
    trace.records.push_back(rec);

    if (!std::isfinite(rec.objective)) {
      throw NumericalError("objective became non-finite at iteration " +
                           std::to_string(it));
    }
    if (opt.step == StepMode::fixed_eta &&
        rec.objective > opt.divergence_factor * initial) {
      throw NumericalError(
          "divergence: objective " + io::format_double(rec.objective) +
          " exceeds " + io::format_double(opt.divergence_factor) +
          "x the initial value at iteration " + std::to_string(it) +
          "; reduce eta or use backtracking");
    }
    const double before = prev;
    prev = rec.objective;
    if (before <= 0.0 || std::abs(before - prev) < p.hp.tol * before) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

struct SolveResult {
  ModelState state;
  IterationTrace trace;
};

inline SolveResult run_alternating(const Problem& p,
                                   const SolverOptions& opt = {}) {
  SolveResult r;
  r.state = init_state(p, opt.init);
  r.trace = solve(r.state, p, opt);
  return r;
}

// Trace CSV: iter,objective,term1,term2,term3,max_delta,seconds. Row 0 is the
// initial state.
inline void write_trace_csv(const std::filesystem::path& path,
                            const IterationTrace& trace) {
  auto out = io::open_output(path);
  out << "iter,objective,term1,term2,term3,max_delta,seconds\n";
  auto row = [&](int it, const ObjectiveTerms& t, double delta, double sec) {
    out << it << ',' << io::format_double(t.total()) << ','
        << io::format_double(t.prediction) << ','
        << io::format_double(t.complexity) << ','
        << io::format_double(t.fidelity) << ',' << io::format_double(delta)
        << ',' << io::format_double(sec) << '\n';
  };
  row(0, trace.initial, 0.0, 0.0);
  for (const auto& r : trace.records) {
    row(r.iter, r.terms, r.max_delta, r.seconds);
  }
  if (!out) throw InputError("write failed: " + path.string());
}

// Checkpoint layout (host byte order, little-endian on supported targets):
//   char[8] magic "TAGCOMP\0", u32 version, u32 reserved,
//   u64 n, u64 m, u64 d,
//   n*m doubles (scores, row-major), then n blocks of m*d doubles (W_i,
//   row-major).
inline constexpr char kCheckpointMagic[8] = {'T', 'A', 'G', 'C',
                                             'O', 'M', 'P', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void write_row_major(std::ofstream& out, const Matrix& m) {
  std::vector<double> buf(static_cast<std::size_t>(m.size()));
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                           Eigen::RowMajor>>(buf.data(), m.rows(), m.cols()) = m;
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(double)));
}

inline Matrix read_row_major(std::ifstream& in, Index rows, Index cols) {
  std::vector<double> buf(static_cast<std::size_t>(rows * cols));
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(double)));
  if (!in) throw InputError("checkpoint: truncated payload");
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(buf.data(), rows,
                                                          cols);
}

}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& path,
                            const ModelState& state) {
  auto out = io::open_output(path, std::ios::out | std::ios::binary);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::uint32_t header[2] = {kCheckpointVersion, 0};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  const std::uint64_t dims[3] = {static_cast<std::uint64_t>(state.n()),
                                 static_cast<std::uint64_t>(state.m()),
                                 static_cast<std::uint64_t>(state.d())};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  detail::write_row_major(out, state.scores);
  for (const auto& w : state.predictors) detail::write_row_major(out, w);
  if (!out) throw InputError("write failed: " + path.string());
}

inline ModelState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint: " + path.string());
  char magic[8];
  std::uint32_t header[2];
  std::uint64_t dims[3];
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw InputError(path.string() + ": not a checkpoint file");
  }
  if (header[0] != kCheckpointVersion) {
    throw InputError(path.string() + ": unsupported checkpoint version " +
                     std::to_string(header[0]));
  }
  const auto n = static_cast<Index>(dims[0]);
  const auto m = static_cast<Index>(dims[1]);
  const auto d = static_cast<Index>(dims[2]);
  ModelState s;
  s.scores = detail::read_row_major(in, n, m);
  s.predictors.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    s.predictors.push_back(detail::read_row_major(in, m, d));
  }
  return s;
}

}  // namespace tagcomp

#endif  // TAGCOMP_OPTIMIZER_HPP_
