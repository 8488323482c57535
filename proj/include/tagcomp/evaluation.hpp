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

// Ranking metrics over held-out tag entries.
//
// Only entries removed by the holdout have ground truth; an entry is a
// positive when its original sign is +1 and a negative when it is -1.
// Rankings sort by descending score with ties going to the smaller tag index
// (smaller linear index i*m+j for pooled rankings).

#ifndef TAGCOMP_EVALUATION_HPP_
#define TAGCOMP_EVALUATION_HPP_

#include <algorithm>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagcomp/common.hpp"
#include "tagcomp/io.hpp"

namespace tagcomp {

struct RankedTag {
  Index tag = 0;
  double score = 0.0;
  double truth = 0.0;  // +1 or -1
};

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct EvalCounts {
  Index images = 0;     // images with >= 1 held-out positive
  Index positives = 0;  // all held-out positives
  Index negatives = 0;  // all held-out negatives
};

struct EvalReport {
  std::vector<PrPoint> pr_points;
  std::vector<Index> evaluated_images;
  std::vector<double> per_image_ap;
  double map = 0.0;        // mean of per-image AP
  double micro_map = 0.0;  // AP of the pooled ranking of all held-out entries
  EvalCounts counts;
};

inline std::vector<RankedTag> rank_heldout(const ScoreMatrix& scores,
                                           const HoldoutSplit& split,
                                           const TagObservations& truth,
                                           Index i) {
  if (i < 0 || i >= scores.rows()) {
    throw InputError("rank_heldout: image index out of range");
  }
  std::vector<RankedTag> out;
  for (Index j = 0; j < scores.cols(); ++j) {
    if (split.held_out(i, j)) out.push_back({j, scores(i, j), truth.signs(i, j)});
  }
  if (out.empty()) {
    throw InputError("rank_heldout: image " + std::to_string(i) +
                     " has no held-out entries");
  }
  std::sort(out.begin(), out.end(), [](const RankedTag& a, const RankedTag& b) {
    return a.score != b.score ? a.score > b.score : a.tag < b.tag;
  });
  return out;
}

// AP = (1/P) sum over positive positions k of (positives in top k) / k.
inline double average_precision(std::span<const double> ranked_truth) {
  double sum = 0.0;
  Index hits = 0;
  for (std::size_t k = 0; k < ranked_truth.size(); ++k) {
    if (ranked_truth[k] > 0.0) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  if (hits == 0) throw InputError("average_precision: no positives in list");
  return sum / static_cast<double>(hits);
}

inline double average_precision(const std::vector<RankedTag>& ranked) {
  std::vector<double> truth;
  truth.reserve(ranked.size());
  for (const auto& r : ranked) truth.push_back(r.truth);
  return average_precision(std::span<const double>(truth));
}

inline EvalReport evaluate(const ScoreMatrix& scores, const HoldoutSplit& split,
                           const TagObservations& truth) {
  if (scores.rows() != truth.n() || scores.cols() != truth.m() ||
      split.holdout_mask.rows() != truth.n() ||
      split.holdout_mask.cols() != truth.m()) {
    throw InputError("evaluate: scores/split/observations shape mismatch");
  }
  if (split.count() == 0) throw InputError("evaluate: empty holdout split");

  EvalReport rep;
  struct Entry {
    double score;
    Index linear;
    double truth;
  };
  std::vector<Entry> pooled;
  for (Index i = 0; i < truth.n(); ++i) {
    Index pos = 0;
    bool any = false;
    for (Index j = 0; j < truth.m(); ++j) {
      if (!split.held_out(i, j)) continue;
      any = true;
      pooled.push_back({scores(i, j), i * truth.m() + j, truth.signs(i, j)});
      if (truth.signs(i, j) > 0.0) {
        ++pos;
        ++rep.counts.positives;
      } else {
        ++rep.counts.negatives;
      }
    }
    if (!any || pos == 0) continue;
    rep.evaluated_images.push_back(i);
    rep.per_image_ap.push_back(
        average_precision(rank_heldout(scores, split, truth, i)));
  }
  if (rep.evaluated_images.empty()) {
    throw InputError("evaluate: no image has a held-out positive");
  }
  rep.counts.images = static_cast<Index>(rep.evaluated_images.size());
  double sum = 0.0;
  for (const double ap : rep.per_image_ap) sum += ap;
  rep.map = sum / static_cast<double>(rep.per_image_ap.size());

  std::sort(pooled.begin(), pooled.end(), [](const Entry& a, const Entry& b) {
    return a.score != b.score ? a.score > b.score : a.linear < b.linear;
  });
  std::vector<double> pooled_truth;
  pooled_truth.reserve(pooled.size());
  for (const auto& e : pooled) pooled_truth.push_back(e.truth);
  rep.micro_map = average_precision(std::span<const double>(pooled_truth));

  // One PR point per distinct score: predict positive iff score >= threshold.
  const double total_pos = static_cast<double>(rep.counts.positives);
  Index tp = 0;
  for (std::size_t k = 0; k < pooled.size(); ++k) {
    if (pooled[k].truth > 0.0) ++tp;
    if (k + 1 < pooled.size() && pooled[k + 1].score == pooled[k].score) {
      continue;
    }
    rep.pr_points.push_back({pooled[k].score,
                             static_cast<double>(tp) / static_cast<double>(k + 1),
                             static_cast<double>(tp) / total_pos});
  }
  return rep;
}

inline nlohmann::json report_to_json(const EvalReport& rep) {
  nlohmann::json j;
  j["map"] = rep.map;
  j["micro_map"] = rep.micro_map;
  j["counts"] = {{"images", rep.counts.images},
                 {"positives", rep.counts.positives},
                 {"negatives", rep.counts.negatives}};
  j["evaluated_images"] = rep.evaluated_images;
  j["per_image_ap"] = rep.per_image_ap;
  return j;
}

inline void write_report(const std::filesystem::path& json_path,
                         const std::filesystem::path& pr_path,
                         const EvalReport& rep) {
  {
    auto out = io::open_output(json_path);
    out << report_to_json(rep).dump(2) << '\n';
    if (!out) throw InputError("write failed: " + json_path.string());
  }
  auto out = io::open_output(pr_path);
  out << "threshold,precision,recall\n";
  for (const auto& p : rep.pr_points) {
    out << io::format_double(p.threshold) << ','
        << io::format_double(p.precision) << ','
        << io::format_double(p.recall) << '\n';
  }
  if (!out) throw InputError("write failed: " + pr_path.string());
}

}  // namespace tagcomp

#endif  // TAGCOMP_EVALUATION_HPP_
