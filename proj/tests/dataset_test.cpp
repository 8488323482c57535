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

#include "tagcomp/dataset.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>

namespace tagcomp {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("tagcomp_dataset_" + std::to_string(std::random_device{}()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path file(const std::string& name, const std::string& body) const {
    std::ofstream(path_ / name) << body;
    return path_ / name;
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

TEST(LoadDataset, EchoesSmallFiles) {
  TempDir dir;
  const auto f = dir.file("f.csv", "# x,y,z\n1,2,3\n4,5,6\n");
  const auto t = dir.file("t.csv", "m=2\n0,0,+1\n1,1,-1\n");
  const Dataset ds = load_dataset(f, t);
  EXPECT_EQ(ds.features.n(), 2);
  EXPECT_EQ(ds.features.d(), 3);
  EXPECT_EQ(ds.features.values(1, 2), 6.0);
  EXPECT_EQ(ds.tags.m(), 2);
  EXPECT_EQ(ds.tags.observed_count(), 2);
  EXPECT_EQ(ds.tags.signs(0, 0), 1.0);
  EXPECT_EQ(ds.tags.signs(1, 1), -1.0);
  EXPECT_EQ(ds.tags.mask(0, 1), 0.0);
  // Missing entries carry the +1 placeholder.
  EXPECT_EQ(ds.tags.signs(0, 1), 1.0);
}

TEST(LoadDataset, UnreferencedTagsAreAllMissingColumns) {
  TempDir dir;
  const auto f = dir.file("f.csv", "1\n2\n");
  const auto t = dir.file("t.csv", "m=4\n0,1,-1\n");
  const Dataset ds = load_dataset(f, t);
  EXPECT_EQ(ds.tags.m(), 4);
  EXPECT_EQ(ds.tags.mask.col(3).sum(), 0.0);
}

TEST(LoadDataset, TagIdOutOfRange) {
  TempDir dir;
  const auto f = dir.file("f.csv", "1,2\n3,4\n");
  const auto t = dir.file("t.csv", "m=2\n0,5,+1\n");
  const std::string msg = error_of([&] { load_dataset(f, t); });
  EXPECT_NE(msg.find("tag id out of range"), std::string::npos) << msg;
  EXPECT_NE(msg.find("t.csv:2"), std::string::npos) << msg;
}

TEST(LoadDataset, EmptyFeaturesFile) {
  TempDir dir;
  const auto f = dir.file("f.csv", "");
  const auto t = dir.file("t.csv", "m=2\n");
  const std::string msg = error_of([&] { load_dataset(f, t); });
  EXPECT_NE(msg.find("n >= 1 violated"), std::string::npos) << msg;
}

TEST(LoadDataset, ReportsFileAndLine) {
  TempDir dir;
  const auto bad_arity = dir.file("a.csv", "1,2\n3\n");
  EXPECT_NE(error_of([&] { load_features(bad_arity); }).find("a.csv:2"),
            std::string::npos);
  const auto nan = dir.file("b.csv", "1,2\n3,nan\n");
  EXPECT_NE(error_of([&] { load_features(nan); }).find("non-finite"),
            std::string::npos);
  const auto f = dir.file("f.csv", "1\n2\n");
  const auto bad_value = dir.file("t1.csv", "m=1\n0,0,2\n");
  EXPECT_NE(error_of([&] { load_dataset(f, bad_value); }).find("outside"),
            std::string::npos);
  const auto bad_image = dir.file("t2.csv", "m=1\n7,0,1\n");
  EXPECT_NE(error_of([&] { load_dataset(f, bad_image); })
                .find("image id out of range"),
            std::string::npos);
  const auto bad_header = dir.file("t3.csv", "0,0,1\n");
  EXPECT_NE(error_of([&] { load_dataset(f, bad_header); }).find("m=<int>"),
            std::string::npos);
  EXPECT_NE(error_of([&] { load_dataset(dir.path() / "missing.csv", f); })
                .find("missing.csv"),
            std::string::npos);
}

TEST(LoadDataset, RoundTripIsBitExact) {
  TempDir dir;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1e3);
  for (int trial = 0; trial < 5; ++trial) {
    SyntheticData s = synthesize(30, 4, 6, 3, 0.5, 100 + trial);
    // Awkward doubles and a partial mask.
    for (Index i = 0; i < s.features.n(); ++i) s.features.values(i, 0) = g(rng);
    s.features.values(0, 1) = 1e-300;
    s.features.values(1, 1) = -0.1;
    auto [masked, split] = apply_holdout(s.tags, 0.3, trial);
    const Dataset ds{s.features, masked};
    write_dataset(dir.path() / "f.csv", dir.path() / "t.csv", ds);
    const Dataset back =
        load_dataset(dir.path() / "f.csv", dir.path() / "t.csv");
    ASSERT_EQ(back.features.values, ds.features.values);
    ASSERT_EQ(back.tags.mask, ds.tags.mask);
    // Placeholder sign for missing entries is +1 after reading.
    for (Index i = 0; i < ds.tags.n(); ++i) {
      for (Index j = 0; j < ds.tags.m(); ++j) {
        if (ds.tags.mask(i, j) != 0.0) {
          ASSERT_EQ(back.tags.signs(i, j), ds.tags.signs(i, j));
        } else {
          ASSERT_EQ(back.tags.signs(i, j), 1.0);
        }
      }
    }
  }
}

// 4x4 tags with the first ten entries (row-major) observed.
TagObservations ten_observed() {
  TagObservations obs{Matrix::Ones(4, 4), Matrix::Zero(4, 4)};
  for (Index k = 0; k < 10; ++k) {
    obs.mask(k / 4, k % 4) = 1.0;
    obs.signs(k / 4, k % 4) = k % 3 == 0 ? -1.0 : 1.0;
  }
  return obs;
}

TEST(ApplyHoldout, FortyPercentOfTenIsFour) {
  const TagObservations obs = ten_observed();
  ASSERT_EQ(obs.observed_count(), 10);
  for (std::uint64_t seed : {0u, 1u, 2u, 99u}) {
    const auto [masked, split] = apply_holdout(obs, 0.4, seed);
    EXPECT_EQ(split.count(), 4);
    EXPECT_EQ(masked.observed_count(), 6);
  }
}

TEST(ApplyHoldout, DeterministicAndSeedSensitive) {
  const TagObservations obs = ten_observed();
  const auto a = apply_holdout(obs, 0.4, 1).second;
  const auto b = apply_holdout(obs, 0.4, 1).second;
  EXPECT_EQ(a.holdout_mask, b.holdout_mask);
  // Over a handful of seeds at least one draw differs from seed 1.
  bool differs = false;
  for (std::uint64_t seed = 2; seed < 8; ++seed) {
    const auto c = apply_holdout(obs, 0.4, seed).second;
    EXPECT_EQ(c.count(), 4);
    differs = differs || c.holdout_mask != a.holdout_mask;
  }
  EXPECT_TRUE(differs);
}

TEST(ApplyHoldout, RejectsBadArguments) {
  const TagObservations obs = ten_observed();
  EXPECT_THROW(apply_holdout(obs, 0.0, 1), InputError);
  EXPECT_THROW(apply_holdout(obs, 1.0, 1), InputError);
  EXPECT_THROW(apply_holdout(obs, -0.2, 1), InputError);
  TagObservations empty{Matrix::Ones(2, 2), Matrix::Zero(2, 2)};
  EXPECT_THROW(apply_holdout(empty, 0.4, 1), InputError);
}

// Property: the holdout only removes observed bits, and masked + held-out
// reproduces the original mask.
TEST(ApplyHoldout, PartitionsTheObservedMask) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 1 + static_cast<Index>(u(rng) * 12);
    const Index m = 1 + static_cast<Index>(u(rng) * 12);
    TagObservations obs{Matrix::Ones(n, m), Matrix::Zero(n, m)};
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < m; ++j) obs.mask(i, j) = u(rng) < 0.7 ? 1.0 : 0.0;
    }
    obs.mask(0, 0) = 1.0;
    const double frac = 0.05 + 0.9 * u(rng);
    const bool per_row = trial % 2 == 1;
    const auto [masked, split] = apply_holdout(obs, frac, trial, per_row);
    ASSERT_EQ(masked.mask + split.holdout_mask, obs.mask);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < m; ++j) {
        ASSERT_LE(split.holdout_mask(i, j), obs.mask(i, j));
      }
    }
    if (!per_row) {
      const double target = frac * static_cast<double>(obs.observed_count());
      ASSERT_LE(std::abs(static_cast<double>(split.count()) - target), 1.0);
    } else {
      for (Index i = 0; i < n; ++i) {
        const double target = frac * obs.mask.row(i).sum();
        ASSERT_LE(std::abs(split.holdout_mask.row(i).sum() - target), 1.0);
      }
    }
  }
}

TEST(HoldoutFile, RoundTrip) {
  TempDir dir;
  const TagObservations obs = ten_observed();
  const auto split = apply_holdout(obs, 0.4, 3).second;
  write_holdout(dir.path() / "h.csv", split);
  const HoldoutSplit back = load_holdout(dir.path() / "h.csv", obs, 3);
  EXPECT_EQ(back.holdout_mask, split.holdout_mask);
  EXPECT_DOUBLE_EQ(back.fraction, 0.4);
}

TEST(Synthesize, NoiselessSignsMatchPlantedScores) {
  const SyntheticData s = synthesize(60, 5, 7, 3, 0.0, 5);
  for (Index i = 0; i < 60; ++i) {
    for (Index j = 0; j < 7; ++j) {
      ASSERT_EQ(s.tags.signs(i, j), s.planted(i, j) < 0.0 ? -1.0 : 1.0);
    }
  }
  EXPECT_EQ(s.tags.observed_count(), 60 * 7);
}

TEST(Synthesize, Deterministic) {
  const SyntheticData a = synthesize(50, 4, 3, 2, 0.2, 9);
  const SyntheticData b = synthesize(50, 4, 3, 2, 0.2, 9);
  EXPECT_EQ(a.features.values, b.features.values);
  EXPECT_EQ(a.planted, b.planted);
  EXPECT_EQ(a.tags, b.tags);
  const SyntheticData c = synthesize(50, 4, 3, 2, 0.2, 10);
  EXPECT_NE(a.features.values, c.features.values);
}

TEST(Synthesize, RejectsBadParameters) {
  EXPECT_THROW(synthesize(5, 2, 2, 5, 0.1, 1), InputError);
  EXPECT_THROW(synthesize(5, 2, 2, 0, 0.1, 1), InputError);
  EXPECT_THROW(synthesize(5, 2, 2, 2, -1.0, 1), InputError);
}

// Refit t* from x by per-cluster least squares (normal equations). The
// planted maps are exactly linear, so the residual is the injected noise
// projected off the d fitted directions: E|r|^2 = noise^2 * (N - d) * m.
TEST(Synthesize, PerClusterRefitResidualMatchesNoise) {
  const Index n = 200, d = 5, m = 10;
  const double noise = 0.1;
  const SyntheticData s = synthesize(n, d, m, 5, noise, 42);
  double rss = 0.0;
  double dof = 0.0;
  for (Index c = 0; c < s.num_clusters; ++c) {
    std::vector<Index> rows;
    for (Index i = 0; i < n; ++i) {
      if (s.cluster[static_cast<std::size_t>(i)] == c) rows.push_back(i);
    }
    const Index nc = static_cast<Index>(rows.size());
    Matrix x(nc, d), t(nc, m);
    for (Index r = 0; r < nc; ++r) {
      x.row(r) = s.features.values.row(rows[static_cast<std::size_t>(r)]);
      t.row(r) = s.planted.row(rows[static_cast<std::size_t>(r)]);
    }
    const Matrix coef = (x.transpose() * x).ldlt().solve(x.transpose() * t);
    rss += (t - x * coef).squaredNorm();
    dof += static_cast<double>((nc - d) * m);
  }
  const double rms = std::sqrt(rss / dof);
  EXPECT_NEAR(rms, noise, 0.15 * noise);
}

TEST(Standardize, ZeroMeanUnitVariance) {
  const SyntheticData s = synthesize(40, 3, 2, 2, 0.1, 4);
  FeatureMatrix f = s.features;
  f.values.col(2).setConstant(5.0);
  const FeatureMatrix z = standardize(f);
  for (Index c = 0; c < 2; ++c) {
    EXPECT_NEAR(z.values.col(c).mean(), 0.0, 1e-12);
    EXPECT_NEAR(z.values.col(c).squaredNorm() / 40.0, 1.0, 1e-12);
  }
  EXPECT_NEAR(z.values.col(2).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

}  // namespace
}  // namespace tagcomp
