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

#ifndef TAGCOMP_NEIGHBORHOOD_HPP_
#define TAGCOMP_NEIGHBORHOOD_HPP_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <utility>
#include <vector>

#include "tagcomp/common.hpp"
#include "tagcomp/io.hpp"

namespace tagcomp {

// forward[i] holds the kappa nearest images of image i, nearest first.
// reverse[i] = { k : i in forward[k] }, ascending in k.
struct NeighborhoodGraph {
  Index kappa = 0;
  bool include_self = false;
  std::vector<std::vector<Index>> forward;
  std::vector<std::vector<Index>> reverse;

  Index n() const { return static_cast<Index>(forward.size()); }

  bool operator==(const NeighborhoodGraph& o) const {
    return kappa == o.kappa && forward == o.forward && reverse == o.reverse;
  }
};

inline std::vector<std::vector<Index>> reverse_index(
    const std::vector<std::vector<Index>>& forward) {
  std::vector<std::vector<Index>> reverse(forward.size());
  for (std::size_t k = 0; k < forward.size(); ++k) {
    for (const Index j : forward[k]) {
      reverse[static_cast<std::size_t>(j)].push_back(static_cast<Index>(k));
    }
  }
  return reverse;
}

// Exact kNN by full distance scan. Squared Euclidean distances are compared
// directly; ties go to the smaller index.
inline NeighborhoodGraph build_knn(const FeatureMatrix& features, Index kappa,
                                   bool include_self = false,
                                   int threads = 1) {
  const Index n = features.n();
  if (kappa < 1) throw InputError("knn: kappa >= 1 violated");
  const Index available = include_self ? n : n - 1;
  if (kappa > available) {
    throw InputError("knn: kappa = " + std::to_string(kappa) +
                     " too large for n = " + std::to_string(n) +
                     (include_self ? "" : " with self excluded"));
  }

  NeighborhoodGraph g;
  g.kappa = kappa;
  g.include_self = include_self;
  g.forward.resize(static_cast<std::size_t>(n));

  const auto& x = features.values;
  parallel_for(n, threads, [&](Index i) {
    std::vector<std::pair<double, Index>> cand;
    cand.reserve(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) {
      if (j == i && !include_self) continue;
      cand.emplace_back((x.row(j) - x.row(i)).squaredNorm(), j);
    }
    std::partial_sort(cand.begin(), cand.begin() + kappa, cand.end());
    auto& out = g.forward[static_cast<std::size_t>(i)];
    out.reserve(static_cast<std::size_t>(kappa));
    for (Index r = 0; r < kappa; ++r) {
      out.push_back(cand[static_cast<std::size_t>(r)].second);
    }
  });
  g.reverse = reverse_index(g.forward);
  return g;
}

// CSV rows "i,rank,j,distance", rank starting at 0 for the nearest.
inline void write_graph_csv(const std::filesystem::path& path,
                            const NeighborhoodGraph& graph,
                            const FeatureMatrix& features) {
  auto out = io::open_output(path);
  out << "i,rank,j,distance\n";
  for (Index i = 0; i < graph.n(); ++i) {
    const auto& nb = graph.forward[static_cast<std::size_t>(i)];
    for (std::size_t r = 0; r < nb.size(); ++r) {
      const double dist =
          (features.values.row(nb[r]) - features.values.row(i)).norm();
      out << i << ',' << r << ',' << nb[r] << ','
          << io::format_double(dist) << '\n';
    }
  }
  if (!out) throw InputError("write failed: " + path.string());
}

}  // namespace tagcomp

#endif  // TAGCOMP_NEIGHBORHOOD_HPP_
