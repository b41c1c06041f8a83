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

#include "stg/metrics.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "stg/assign.hpp"
#include "stg/errors.hpp"

namespace stg {
namespace {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

const Mask* mask_at(const Region& region, int frame) {
  const auto it = region.frames.find(frame);
  return it == region.frames.end() ? nullptr : &it->second;
}

double ratio(std::int64_t num, std::int64_t den) {
  return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

// Pixels of `region` on the evaluated frames, optionally minus `ignore`.
std::int64_t region_area(const Region& region, std::span<const int> eval_frames,
                         const Region* ignore) {
  std::int64_t total = 0;
  for (const int f : eval_frames) {
    const Mask* m = mask_at(region, f);
    if (m == nullptr) continue;
    total += m->area();
    if (ignore != nullptr) {
      if (const Mask* ig = mask_at(*ignore, f)) total -= intersection_area(*m, *ig);
    }
  }
  return total;
}

}  // namespace

double harmonic_f(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0 ? 2.0 * precision * recall / sum : 0.0;
}

Prf pairwise_prf(const Region& prediction, const Region& ground_truth,
                 std::span<const int> eval_frames, const Region* ignore) {
  std::int64_t inter = 0;
  for (const int f : eval_frames) {
    const Mask* c = mask_at(prediction, f);
    const Mask* g = mask_at(ground_truth, f);
    if (c != nullptr && g != nullptr) inter += intersection_area(*c, *g);
  }
  // Ground truth never contains ignore pixels, so the intersection is
  // unaffected by excluding them from the prediction.
  const auto c_area = region_area(prediction, eval_frames, ignore);
  const auto g_area = region_area(ground_truth, eval_frames, nullptr);
  Prf out;
  out.precision = ratio(inter, c_area);
  out.recall = ratio(inter, g_area);
  out.f_measure = harmonic_f(out.precision, out.recall);
  return out;
}

FbmsCounts fbms_counts(const GroundTruthSequence& gt, std::span<const Region> predictions,
                       FbmsMode mode) {
  const std::vector<int> eval_frames = gt.frame_indices();
  const std::vector<Region> gts = gt.regions();
  const Region ignore = gt.ignore_region();
  const Region* excluded = mode == FbmsMode::official ? &ignore : nullptr;

  const auto n_pred = static_cast<Eigen::Index>(predictions.size());
  const auto n_gt = static_cast<Eigen::Index>(gts.size());

  FbmsCounts counts;
  counts.ground_truth_regions = static_cast<int>(n_gt);
  counts.predictions = static_cast<int>(n_pred);

  std::vector<std::int64_t> pred_area(n_pred), gt_area(n_gt);
  for (Eigen::Index i = 0; i < n_pred; ++i) {
    pred_area[i] = region_area(predictions[i], eval_frames, excluded);
  }
  for (Eigen::Index j = 0; j < n_gt; ++j) {
    gt_area[j] = region_area(gts[j], eval_frames, nullptr);
    counts.ground_truth_pixels += gt_area[j];
  }

  CountMatrix inter = CountMatrix::Zero(n_pred, n_gt);
  for (const int f : eval_frames) {
    for (Eigen::Index j = 0; j < n_gt; ++j) {
      const Mask* g = mask_at(gts[j], f);
      if (g == nullptr || g->empty()) continue;
      for (Eigen::Index i = 0; i < n_pred; ++i) {
        if (const Mask* c = mask_at(predictions[i], f)) inter(i, j) += intersection_area(*c, *g);
      }
    }
  }

  Eigen::MatrixXd f_matrix(n_pred, n_gt);
  for (Eigen::Index i = 0; i < n_pred; ++i) {
    for (Eigen::Index j = 0; j < n_gt; ++j) {
      f_matrix(i, j) =
          harmonic_f(ratio(inter(i, j), pred_area[i]), ratio(inter(i, j), gt_area[j]));
    }
  }

  // Rows and columns with no positive F cannot contribute to the optimum;
  // dropping them keeps the matching of the rest independent of them.
  std::vector<Eigen::Index> rows, cols;
  for (Eigen::Index i = 0; i < n_pred; ++i) {
    if ((f_matrix.row(i).array() > 0).any()) rows.push_back(i);
  }
  for (Eigen::Index j = 0; j < n_gt; ++j) {
    if ((f_matrix.col(j).array() > 0).any()) cols.push_back(j);
  }
  Eigen::MatrixXd reduced(static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < cols.size(); ++b) reduced(a, b) = f_matrix(rows[a], cols[b]);
  }
  const auto matching = solve_max_assignment(reduced);

  std::vector<char> matched_pred(n_pred, 0);
  for (const auto& [a, b] : matching.pairs) {
    const Eigen::Index i = rows[a];
    const Eigen::Index j = cols[b];
    const double f = f_matrix(i, j);
    if (f <= 0) continue;
    matched_pred[i] = 1;
    counts.matches.emplace_back(static_cast<int>(i), static_cast<int>(j));
    counts.matched_f.push_back(f);
    counts.matched_intersection += inter(i, j);
    if (f > 0.75) ++counts.n_over_075;
  }
  for (Eigen::Index i = 0; i < n_pred; ++i) {
    if (mode == FbmsMode::proposed || matched_pred[i]) counts.predicted_pixels += pred_area[i];
  }
  return counts;
}

bool MetricReport::any_degenerate() const {
  if (aggregate.degenerate) return true;
  return std::any_of(per_sequence.begin(), per_sequence.end(),
                     [](const SequenceScores& s) { return s.degenerate; });
}

namespace {

SequenceScores scores_from_counts(std::string name, const FbmsCounts& c, FbmsMode mode) {
  SequenceScores s;
  s.name = std::move(name);
  if (c.degenerate()) {
    s.degenerate = true;
    s.note = "no ground-truth regions";
    return s;
  }
  double precision = 1.0;
  if (c.predicted_pixels > 0) {
    precision = ratio(c.matched_intersection, c.predicted_pixels);
  } else {
    s.degenerate = mode == FbmsMode::proposed && c.predictions == 0;
    s.note = "no predicted pixels; precision taken as 1";
  }
  const double recall = ratio(c.matched_intersection, c.ground_truth_pixels);
  s.precision = precision;
  s.recall = recall;
  s.f_measure = harmonic_f(precision, recall);
  if (mode == FbmsMode::official) s.n_over_075 = c.n_over_075;
  return s;
}

}  // namespace

MetricReport fbms_report(std::span<const std::string> names, std::span<const FbmsCounts> counts,
                         FbmsMode mode) {
  if (names.size() != counts.size()) throw InputError("fbms_report: names and counts differ in length");
  MetricReport report;
  report.metric = mode == FbmsMode::official ? "official" : "proposed";
  FbmsCounts total;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    report.per_sequence.push_back(scores_from_counts(names[k], counts[k], mode));
    total.matched_intersection += counts[k].matched_intersection;
    total.predicted_pixels += counts[k].predicted_pixels;
    total.ground_truth_pixels += counts[k].ground_truth_pixels;
    total.n_over_075 += counts[k].n_over_075;
    total.ground_truth_regions += counts[k].ground_truth_regions;
    total.predictions += counts[k].predictions;
  }
  report.aggregate = scores_from_counts("aggregate", total, mode);
  return report;
}

MetricReport official_measure(const GroundTruthSequence& gt, std::span<const Region> predictions) {
  const std::string name = gt.name();
  const FbmsCounts c = fbms_counts(gt, predictions, FbmsMode::official);
  return fbms_report({&name, 1}, {&c, 1}, FbmsMode::official);
}

MetricReport proposed_measure(const GroundTruthSequence& gt, std::span<const Region> predictions) {
  const std::string name = gt.name();
  const FbmsCounts c = fbms_counts(gt, predictions, FbmsMode::proposed);
  return fbms_report({&name, 1}, {&c, 1}, FbmsMode::proposed);
}

double delta_obj(const std::map<std::string, int>& gt_counts,
                 const std::map<std::string, int>& pred_counts) {
  if (gt_counts.empty()) throw InputError("delta_obj: no sequences");
  if (gt_counts.size() != pred_counts.size()) throw InputError("delta_obj: sequence keys differ");
  double sum = 0;
  for (const auto& [name, count] : gt_counts) {
    const auto it = pred_counts.find(name);
    if (it == pred_counts.end()) throw InputError("delta_obj: no prediction count for " + name);
    sum += std::abs(it->second - count);
  }
  return sum / static_cast<double>(gt_counts.size());
}

std::optional<double> average_precision(std::span<const std::vector<Mask>> gt_per_frame,
                                        std::span<const std::vector<ScoredMask>> dets_per_frame,
                                        double iou_threshold, ApMode mode) {
  if (gt_per_frame.size() != dets_per_frame.size()) {
    throw InputError("average_precision: ground truth and detections cover different frames");
  }
  const std::size_t n_frames = gt_per_frame.size();

  std::vector<std::vector<std::optional<Box>>> gt_boxes(n_frames);
  std::size_t n_gt = 0;
  for (std::size_t f = 0; f < n_frames; ++f) {
    for (const auto& g : gt_per_frame[f]) {
      gt_boxes[f].push_back(bounding_box(g));
      if (!g.empty()) ++n_gt;
    }
  }
  if (n_gt == 0) return std::nullopt;

  struct Ref {
    double score;
    std::size_t frame;
    std::size_t index;
  };
  std::vector<Ref> order;
  for (std::size_t f = 0; f < n_frames; ++f) {
    for (std::size_t k = 0; k < dets_per_frame[f].size(); ++k) {
      const double s = dets_per_frame[f][k].score;
      if (!std::isfinite(s)) throw InputError("average_precision: non-finite score");
      order.push_back({s, f, k});
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const Ref& a, const Ref& b) { return a.score > b.score; });

  std::vector<std::vector<char>> taken(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) taken[f].assign(gt_per_frame[f].size(), 0);

  std::vector<char> hit(order.size(), 0);
  for (std::size_t d = 0; d < order.size(); ++d) {
    const auto& ref = order[d];
    const Mask& det = dets_per_frame[ref.frame][ref.index].mask;
    const auto det_box = mode == ApMode::box ? bounding_box(det) : std::nullopt;
    double best = -1;
    std::size_t best_g = 0;
    for (std::size_t g = 0; g < gt_per_frame[ref.frame].size(); ++g) {
      const Mask& gm = gt_per_frame[ref.frame][g];
      if (taken[ref.frame][g] || gm.empty()) continue;
      double overlap = 0;
      if (mode == ApMode::mask) {
        overlap = iou(det, gm);
      } else if (det_box) {
        overlap = box_iou(*det_box, *gt_boxes[ref.frame][g]);
      }
      if (overlap >= iou_threshold && overlap > best) {
        best = overlap;
        best_g = g;
      }
    }
    if (best >= 0) {
      taken[ref.frame][best_g] = 1;
      hit[d] = 1;
    }
  }

  // Precision/recall after each detection, then the all-points envelope.
  std::vector<double> precision(order.size()), recall(order.size());
  std::size_t tp = 0;
  for (std::size_t d = 0; d < order.size(); ++d) {
    tp += hit[d];
    precision[d] = static_cast<double>(tp) / static_cast<double>(d + 1);
    recall[d] = static_cast<double>(tp) / static_cast<double>(n_gt);
  }
  for (std::size_t d = order.size(); d-- > 1;) {
    precision[d - 1] = std::max(precision[d - 1], precision[d]);
  }
  double ap = 0;
  double prev_recall = 0;
  for (std::size_t d = 0; d < order.size(); ++d) {
    ap += (recall[d] - prev_recall) * precision[d];
    prev_recall = recall[d];
  }
  return ap;
}

std::vector<Mask> binarize_detections(std::span<const std::vector<ScoredMask>> dets_per_frame,
                                      int width, int height, double threshold) {
  std::vector<Mask> out;
  out.reserve(dets_per_frame.size());
  for (const auto& frame : dets_per_frame) {
    std::vector<Mask> kept;
    for (const auto& d : frame) {
      if (d.score > threshold) kept.push_back(d.mask);
    }
    out.push_back(union_merge(kept, width, height));
  }
  return out;
}

}  // namespace stg
