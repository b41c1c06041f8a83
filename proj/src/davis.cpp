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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "stg/errors.hpp"
#include "stg/metrics.hpp"

namespace stg {
namespace {

double frame_j(const Mask& gt, const Mask& pred) {
  if (gt.empty() && pred.empty()) return 1.0;
  return iou(gt, pred);
}

// Foreground pixels with a 4-neighbour outside the mask (the frame border
// counts as outside).
std::vector<std::uint8_t> boundary_map(const Mask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  const auto dense = rle_decode(mask);
  std::vector<std::uint8_t> out(dense.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      if (!dense[p]) continue;
      const bool edge = x == 0 || y == 0 || x == w - 1 || y == h - 1 || !dense[p - 1] ||
                        !dense[p + 1] || !dense[p - w] || !dense[p + w];
      out[p] = edge ? 1 : 0;
    }
  }
  return out;
}

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher). Entries of f
// that are infinite are not seeds.
void squared_distance_1d(const std::vector<double>& f, std::vector<double>& d,
                         std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  const double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    double s = 0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), inf);
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const int p = v[k];
    d[q] = double(q - p) * (q - p) + f[p];
  }
}

// Exact squared Euclidean distance to the nearest set pixel.
std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& seeds, int w,
                                               int h) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> grid(seeds.size());
  for (std::size_t p = 0; p < seeds.size(); ++p) grid[p] = seeds[p] ? 0.0 : inf;
  const int n = std::max(w, h);
  std::vector<double> f, d;
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  f.reserve(n);
  d.reserve(n);
  for (int x = 0; x < w; ++x) {
    f.assign(h, 0);
    d.assign(h, 0);
    for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
    squared_distance_1d(f, d, v, z);
    for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
  }
  for (int y = 0; y < h; ++y) {
    f.assign(grid.begin() + static_cast<std::ptrdiff_t>(y) * w,
             grid.begin() + static_cast<std::ptrdiff_t>(y + 1) * w);
    d.assign(w, 0);
    squared_distance_1d(f, d, v, z);
    std::copy(d.begin(), d.end(), grid.begin() + static_cast<std::ptrdiff_t>(y) * w);
  }
  return grid;
}

// Fraction of `from` boundary pixels within `tolerance` of a `to` pixel.
double matched_fraction(const std::vector<std::uint8_t>& from, const std::vector<double>& dist_to,
                        double tol_sq, std::int64_t count) {
  std::int64_t matched = 0;
  for (std::size_t p = 0; p < from.size(); ++p) {
    if (from[p] && dist_to[p] <= tol_sq) ++matched;
  }
  return static_cast<double>(matched) / static_cast<double>(count);
}

}  // namespace

JStats davis_j(std::span<const Mask> gt, std::span<const Mask> pred) {
  if (gt.empty()) throw InputError("davis_j: empty sequence");
  if (gt.size() != pred.size()) throw InputError("davis_j: sequences are not aligned");
  const std::size_t n = gt.size();
  std::vector<double> per_frame(n);
  for (std::size_t t = 0; t < n; ++t) per_frame[t] = frame_j(gt[t], pred[t]);

  JStats out;
  std::size_t above = 0;
  for (const double j : per_frame) {
    out.mean += j;
    if (j > 0.5) ++above;
  }
  out.mean /= static_cast<double>(n);
  out.recall = static_cast<double>(above) / static_cast<double>(n);

  if (n >= 4) {
    // Four bins, the first n % 4 one frame longer.
    const std::size_t base = n / 4;
    const std::size_t extra = n % 4;
    auto bin_mean = [&](std::size_t b) {
      const std::size_t begin = b * base + std::min(b, extra);
      const std::size_t len = base + (b < extra ? 1 : 0);
      double s = 0;
      for (std::size_t t = begin; t < begin + len; ++t) s += per_frame[t];
      return s / static_cast<double>(len);
    };
    out.decay = bin_mean(0) - bin_mean(3);
  }
  return out;
}

int boundary_tolerance(int width, int height, double fraction) {
  const double diag = std::hypot(static_cast<double>(width), static_cast<double>(height));
  return static_cast<int>(std::ceil(fraction * diag));
}

double frame_boundary_f(const Mask& gt, const Mask& pred, int tolerance_px) {
  if (gt.width() != pred.width() || gt.height() != pred.height()) {
    throw DimensionError("frame_boundary_f: mask dimension mismatch");
  }
  if (tolerance_px < 0) throw InputError("boundary tolerance must be non-negative");
  const int w = gt.width();
  const int h = gt.height();
  const auto gt_b = boundary_map(gt);
  const auto pred_b = boundary_map(pred);
  const auto n_gt = std::count(gt_b.begin(), gt_b.end(), std::uint8_t{1});
  const auto n_pred = std::count(pred_b.begin(), pred_b.end(), std::uint8_t{1});
  if (n_gt == 0 && n_pred == 0) return 1.0;
  if (n_gt == 0 || n_pred == 0) return 0.0;

  const double tol_sq = static_cast<double>(tolerance_px) * tolerance_px;
  const double precision =
      matched_fraction(pred_b, squared_distance_transform(gt_b, w, h), tol_sq, n_pred);
  const double recall =
      matched_fraction(gt_b, squared_distance_transform(pred_b, w, h), tol_sq, n_gt);
  return harmonic_f(precision, recall);
}

double boundary_f(std::span<const Mask> gt, std::span<const Mask> pred,
                  std::optional<int> tolerance_px) {
  if (gt.size() != pred.size()) throw InputError("boundary_f: sequences are not aligned");
  if (gt.empty()) throw InputError("boundary_f: empty sequence");
  const int tol = tolerance_px.value_or(boundary_tolerance(gt[0].width(), gt[0].height()));
  double sum = 0;
  for (std::size_t t = 0; t < gt.size(); ++t) sum += frame_boundary_f(gt[t], pred[t], tol);
  return sum / static_cast<double>(gt.size());
}

}  // namespace stg
