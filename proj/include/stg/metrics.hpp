// Copyright 2026 The stgeval Authors. All Rights Reserved.
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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stg/mask.hpp"
#include "stg/sequence.hpp"

namespace stg {

struct Prf {
  double precision = 0;
  double recall = 0;
  double f_measure = 0;
};

/// Harmonic mean, 0 when both terms are 0.
double harmonic_f(double precision, double recall);

/// Precision/recall/F of one predicted region against one ground-truth
/// region, pooling pixels over `eval_frames` only. When `ignore` is given
/// its pixels are removed from the prediction before counting. An empty
/// prediction (resp. ground truth) gives P = 0 (resp. R = 0).
Prf pairwise_prf(const Region& prediction, const Region& ground_truth,
                 std::span<const int> eval_frames, const Region* ignore = nullptr);

enum class FbmsMode {
  official,  // unmatched predictions ignored, ignore pixels excluded
  proposed,  // unmatched predictions are false positives, all pixels count
};

/// Raw pooled pixel counts of one sequence; summing these across sequences
/// gives the micro-averaged dataset score.
struct FbmsCounts {
  std::int64_t matched_intersection = 0;
  std::int64_t predicted_pixels = 0;
  std::int64_t ground_truth_pixels = 0;
  std::int64_t n_over_075 = 0;
  int ground_truth_regions = 0;
  int predictions = 0;
  /// (prediction index, ground-truth index) pairs with F_ij > 0.
  std::vector<std::pair<int, int>> matches;
  std::vector<double> matched_f;

  bool degenerate() const { return ground_truth_regions == 0; }
};

FbmsCounts fbms_counts(const GroundTruthSequence& gt, std::span<const Region> predictions,
                       FbmsMode mode);

/// One row of a report. Unset fields were not computed (or undefined).
struct SequenceScores {
  std::string name;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f_measure;
  std::optional<std::int64_t> n_over_075;
  std::optional<double> delta_obj;
  std::optional<double> ap_box;
  std::optional<double> ap_mask;
  std::optional<double> j_mean;
  std::optional<double> j_recall;
  std::optional<double> j_decay;
  std::optional<double> f_boundary;
  bool degenerate = false;
  std::string note;
};

struct MetricReport {
  std::string metric;
  SequenceScores aggregate;
  std::vector<SequenceScores> per_sequence;

  bool any_degenerate() const;
};

/// Per-sequence rows plus a micro-averaged aggregate row built from the
/// pooled counts. `names` and `counts` are parallel.
MetricReport fbms_report(std::span<const std::string> names, std::span<const FbmsCounts> counts,
                         FbmsMode mode);

MetricReport official_measure(const GroundTruthSequence& gt, std::span<const Region> predictions);
MetricReport proposed_measure(const GroundTruthSequence& gt, std::span<const Region> predictions);

/// Mean over sequences of |predicted count - ground-truth count|. Throws
/// InputError when the key sets differ or are empty.
double delta_obj(const std::map<std::string, int>& gt_counts,
                 const std::map<std::string, int>& pred_counts);

struct ScoredMask {
  double score = 0;
  Mask mask;
};

enum class ApMode { box, mask };

/// Single-category average precision. Detections are matched greedily in
/// descending score order (ties: frame, then position in the frame) to the
/// best-overlapping unmatched ground truth of their frame with
/// IoU >= threshold; AP is the area under the all-points precision
/// envelope. Returns nullopt when there is no ground truth.
std::optional<double> average_precision(std::span<const std::vector<Mask>> gt_per_frame,
                                        std::span<const std::vector<ScoredMask>> dets_per_frame,
                                        double iou_threshold = 0.5, ApMode mode = ApMode::mask);

/// Per-frame union of the masks whose score is strictly above `threshold`.
std::vector<Mask> binarize_detections(std::span<const std::vector<ScoredMask>> dets_per_frame,
                                      int width, int height, double threshold = 0.7);

struct JStats {
  double mean = 0;
  double recall = 0;
  double decay = 0;
};

/// Region similarity over aligned binary frames. A frame where both masks
/// are empty scores 1. Decay is the mean of the first minus the last of
/// four near-equal temporal bins (0 for fewer than four frames). Throws
/// InputError on an empty or misaligned sequence.
JStats davis_j(std::span<const Mask> gt, std::span<const Mask> pred);

/// ceil(fraction * image diagonal); the conventional fraction is 0.008.
int boundary_tolerance(int width, int height, double fraction = 0.008);

/// Boundary F of one frame: 4-connected boundary pixels, matched within
/// Euclidean distance `tolerance_px`.
double frame_boundary_f(const Mask& gt, const Mask& pred, int tolerance_px);

/// Frame average of frame_boundary_f; default tolerance from
/// boundary_tolerance().
double boundary_f(std::span<const Mask> gt, std::span<const Mask> pred,
                  std::optional<int> tolerance_px = std::nullopt);

}  // namespace stg
