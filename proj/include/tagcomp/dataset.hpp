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

// Loading, writing, masking and synthesizing feature/tag data.
//
// Features file: CSV, one row per image, d numeric columns. Lines starting
// with '#' are comments.
//
// Tags file: a header line "m=<int>", then triplets "image_id,tag_id,value"
// with value in {+1,-1}. Pairs that never appear are missing (mask 0).
//
// Holdout file: pairs "image_id,tag_id" of held-out entries.

#ifndef TAGCOMP_DATASET_HPP_
#define TAGCOMP_DATASET_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "tagcomp/common.hpp"
#include "tagcomp/io.hpp"

namespace tagcomp {

struct Dataset {
  FeatureMatrix features;
  TagObservations tags;
};

inline FeatureMatrix load_features(const std::filesystem::path& path) {
  FeatureMatrix f{io::read_matrix_csv(path)};
  if (f.n() < 1) throw InputError(path.string() + ": n >= 1 violated");
  if (f.d() < 1) throw InputError(path.string() + ": d >= 1 violated");
  return f;
}

inline TagObservations load_tags(const std::filesystem::path& path, Index n) {
  auto in = io::open_input(path);
  std::string line;
  std::size_t lineno = 0;
  Index m = -1;
  TagObservations obs;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view t = io::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (m < 0) {
      if (t.substr(0, 2) != "m=" || !io::parse_int(t.substr(2), m) || m < 1) {
        throw InputError(io::location(path, lineno) +
                         ": expected header 'm=<int>' with m >= 1");
      }
      obs.signs = Matrix::Ones(n, m);
      obs.mask = Matrix::Zero(n, m);
      continue;
    }
    const auto fields = io::split(t, ',');
    if (fields.size() != 3) {
      throw InputError(io::location(path, lineno) +
                       ": malformed row, expected image_id,tag_id,value");
    }
    Index img = 0, tag = 0, value = 0;
    if (!io::parse_int(fields[0], img) || !io::parse_int(fields[1], tag) ||
        !io::parse_int(fields[2], value)) {
      throw InputError(io::location(path, lineno) + ": cannot parse triplet");
    }
    if (img < 0 || img >= n) {
      throw InputError(io::location(path, lineno) + ": image id out of range");
    }
    if (tag < 0 || tag >= m) {
      throw InputError(io::location(path, lineno) + ": tag id out of range");
    }
    if (value != 1 && value != -1) {
      throw InputError(io::location(path, lineno) +
                       ": tag value outside {+1,-1}");
    }
    if (obs.mask(img, tag) != 0.0) {
      throw InputError(io::location(path, lineno) + ": duplicate entry");
    }
    obs.signs(img, tag) = static_cast<double>(value);
    obs.mask(img, tag) = 1.0;
  }
  if (m < 0) throw InputError(path.string() + ": missing 'm=<int>' header");
  return obs;
}

inline Dataset load_dataset(const std::filesystem::path& features_path,
                            const std::filesystem::path& tags_path) {
  Dataset ds;
  ds.features = load_features(features_path);
  ds.tags = load_tags(tags_path, ds.features.n());
  return ds;
}

inline void write_features(const std::filesystem::path& path,
                           const FeatureMatrix& features) {
  io::write_matrix_csv(path, features.values);
}

inline void write_tags(const std::filesystem::path& path,
                       const TagObservations& obs) {
  auto out = io::open_output(path);
  out << "m=" << obs.m() << '\n';
  for (Index i = 0; i < obs.n(); ++i) {
    for (Index j = 0; j < obs.m(); ++j) {
      if (obs.mask(i, j) == 0.0) continue;
      out << i << ',' << j << ',' << (obs.signs(i, j) > 0 ? "+1" : "-1")
          << '\n';
    }
  }
  if (!out) throw InputError("write failed: " + path.string());
}

inline void write_dataset(const std::filesystem::path& features_path,
                          const std::filesystem::path& tags_path,
                          const Dataset& ds) {
  write_features(features_path, ds.features);
  write_tags(tags_path, ds.tags);
}

inline void write_holdout(const std::filesystem::path& path,
                          const HoldoutSplit& split) {
  auto out = io::open_output(path);
  for (Index i = 0; i < split.holdout_mask.rows(); ++i) {
    for (Index j = 0; j < split.holdout_mask.cols(); ++j) {
      if (split.held_out(i, j)) out << i << ',' << j << '\n';
    }
  }
  if (!out) throw InputError("write failed: " + path.string());
}

// Reads a holdout file recorded against `original`. Only observed entries
// may appear.
inline HoldoutSplit load_holdout(const std::filesystem::path& path,
                                 const TagObservations& original,
                                 std::uint64_t seed) {
  auto in = io::open_input(path);
  HoldoutSplit split;
  split.seed = seed;
  split.holdout_mask = Matrix::Zero(original.n(), original.m());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view t = io::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = io::split(t, ',');
    Index img = 0, tag = 0;
    if (fields.size() != 2 || !io::parse_int(fields[0], img) ||
        !io::parse_int(fields[1], tag)) {
      throw InputError(io::location(path, lineno) +
                       ": malformed row, expected image_id,tag_id");
    }
    if (img < 0 || img >= original.n()) {
      throw InputError(io::location(path, lineno) + ": image id out of range");
    }
    if (tag < 0 || tag >= original.m()) {
      throw InputError(io::location(path, lineno) + ": tag id out of range");
    }
    if (original.mask(img, tag) == 0.0) {
      throw InputError(io::location(path, lineno) +
                       ": held-out entry was never observed");
    }
    split.holdout_mask(img, tag) = 1.0;
  }
  const Index observed = original.observed_count();
  split.fraction = observed > 0 ? static_cast<double>(split.count()) /
                                      static_cast<double>(observed)
                                : 0.0;
  return split;
}

// Removes entries from the observed mask for evaluation. The default draws
// round(fraction * observed) entries uniformly without replacement over the
// whole matrix; `per_row` instead draws round(fraction * observed_i) inside
// every row.
inline std::pair<TagObservations, HoldoutSplit> apply_holdout(
    const TagObservations& obs, double fraction, std::uint64_t seed,
    bool per_row = false) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw InputError("holdout fraction must lie in (0,1)");
  }
  if (obs.observed_count() == 0) {
    throw InputError("holdout requires at least one observed entry");
  }
  auto rng = make_stream(seed, "holdout");
  HoldoutSplit split;
  split.fraction = fraction;
  split.seed = seed;
  split.holdout_mask = Matrix::Zero(obs.n(), obs.m());

  // Partial Fisher-Yates over the candidate list; the first k survive.
  auto draw = [&](std::vector<std::pair<Index, Index>>& cand) {
    const auto total = static_cast<double>(cand.size());
    const auto k = static_cast<std::size_t>(std::lround(fraction * total));
    for (std::size_t r = 0; r < k; ++r) {
      std::uniform_int_distribution<std::size_t> pick(r, cand.size() - 1);
      std::swap(cand[r], cand[pick(rng)]);
      split.holdout_mask(cand[r].first, cand[r].second) = 1.0;
    }
  };

  std::vector<std::pair<Index, Index>> cand;
  if (per_row) {
    for (Index i = 0; i < obs.n(); ++i) {
      cand.clear();
      for (Index j = 0; j < obs.m(); ++j) {
        if (obs.mask(i, j) != 0.0) cand.emplace_back(i, j);
      }
      draw(cand);
    }
  } else {
    for (Index i = 0; i < obs.n(); ++i) {
      for (Index j = 0; j < obs.m(); ++j) {
        if (obs.mask(i, j) != 0.0) cand.emplace_back(i, j);
      }
    }
    draw(cand);
  }

  TagObservations masked = obs;
  masked.mask = (split.holdout_mask.array() != 0.0)
                    .select(Matrix::Zero(obs.n(), obs.m()), obs.mask);
  return {std::move(masked), std::move(split)};
}

// Per-dimension zero mean, unit variance. Constant columns are only centered.
inline FeatureMatrix standardize(const FeatureMatrix& features) {
  FeatureMatrix out = features;
  const double n = static_cast<double>(features.n());
  for (Index c = 0; c < features.d(); ++c) {
    auto col = out.values.col(c);
    const double mean = col.sum() / n;
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / n);
    if (sd > 0.0) col /= sd;
  }
  return out;
}

struct SyntheticData {
  FeatureMatrix features;
  TagObservations tags;
  ScoreMatrix planted;          // ground-truth scores t*
  std::vector<Index> cluster;   // cluster id per image
  Index num_clusters = 0;
};

// Cluster-structured planted model.
//
// Images are dealt round-robin into max(1, n / (4 (kappa + 1))) clusters.
// Cluster c has a center mu_c ~ N(0, 3^2 I) and a random two-dimensional
// patch basis U_c (d x 2, N(0, 1/d) entries); its images are
//   x = mu_c + U_c z + 0.3 e,   z ~ N(0, 8^2 I_2), e ~ N(0, I_d).
// Scores come from a cluster-local linear map, t* = A_c x + noise * N(0, I),
// where A_c = B_c P_c + o_c mu_c' / |mu_c|^2 with P_c the projector removing
// the mu_c direction, B_c ~ N(0, 1/d) and o_c ~ N(0, I). A_c sends the
// center to the small offset o_c, so tag signs change inside clusters.
// Signs are sign(t*) (zero maps to +1) and every entry is observed.
inline SyntheticData synthesize(Index n, Index d, Index m, Index kappa,
                                double noise, std::uint64_t seed) {
  if (kappa < 1) throw InputError("synthesize: kappa >= 1 violated");
  if (n <= kappa) throw InputError("synthesize: n > kappa violated");
  if (d < 1 || m < 1) throw InputError("synthesize: d, m >= 1 violated");
  if (!(noise >= 0.0)) throw InputError("synthesize: noise >= 0 violated");

  constexpr double kCenterScale = 3.0;
  constexpr double kPatchSpread = 8.0;
  constexpr double kOffPatch = 0.3;
  constexpr Index kPatchDim = 2;

  auto rng = make_stream(seed, "synth");
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Index clusters = std::max<Index>(1, n / (4 * (kappa + 1)));
  const Index r = std::min(kPatchDim, d);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  auto random_matrix = [&](Index rows, Index cols, double scale) {
    Matrix a(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) a(i, j) = scale * gauss(rng);
    }
    return a;
  };

  std::vector<Vector> centers;
  std::vector<Matrix> bases, maps;
  for (Index c = 0; c < clusters; ++c) {
    Vector mu = random_matrix(d, 1, kCenterScale);
    bases.push_back(random_matrix(d, r, inv_sqrt_d));
    const Matrix b = random_matrix(m, d, inv_sqrt_d);
    const Vector o = random_matrix(m, 1, 1.0);
    const double mu2 = mu.squaredNorm();
    Matrix a = b;
    if (mu2 > 0.0) {
      const Matrix proj =
          Matrix::Identity(d, d) - mu * mu.transpose() / mu2;
      a = b * proj + o * mu.transpose() / mu2;
    }
    maps.push_back(std::move(a));
    centers.push_back(std::move(mu));
  }

  SyntheticData out;
  out.num_clusters = clusters;
  out.features.values.resize(n, d);
  out.planted.resize(n, m);
  out.cluster.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Index c = i % clusters;
    const auto u = static_cast<std::size_t>(c);
    out.cluster[static_cast<std::size_t>(i)] = c;
    const Vector z = random_matrix(r, 1, kPatchSpread);
    const Vector x =
        centers[u] + bases[u] * z + random_matrix(d, 1, kOffPatch);
    out.features.values.row(i) = x.transpose();
    const Vector t = maps[u] * x + random_matrix(m, 1, noise);
    out.planted.row(i) = t.transpose();
  }
  out.tags.signs = out.planted.unaryExpr(
      [](double s) { return s < 0.0 ? -1.0 : 1.0; });
  out.tags.mask = Matrix::Ones(n, m);
  return out;
}

}  // namespace tagcomp

#endif  // TAGCOMP_DATASET_HPP_
