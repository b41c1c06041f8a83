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
#include <optional>
#include <span>
#include <vector>

namespace stg {

/// Binary single-frame region stored as a canonical run-length encoding.
///
/// Runs are row-major from the top-left pixel and alternate background and
/// foreground, always starting with a (possibly zero) background run. The
/// run list is never empty, sums to width * height, and contains no zero
/// run except possibly the leading one. Every mask therefore has exactly
/// one representation, so equality of masks is equality of run lists.
///
/// Masks are immutable values.
class Mask {
 public:
  using Run = std::uint32_t;

  /// Empty mask of the given shape. Throws DimensionError on a
  /// non-positive side.
  Mask(int width, int height);

  /// Validates `runs` against the canonical form; throws
  /// MalformedMaskError on any violation.
  static Mask from_runs(int width, int height, std::vector<Run> runs);
  static Mask full(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::int64_t pixel_count() const {
    return static_cast<std::int64_t>(width_) * height_;
  }
  std::span<const Run> runs() const { return runs_; }

  std::int64_t area() const { return area_; }
  bool empty() const { return area_ == 0; }

  /// Calls f(begin, end) for every foreground interval [begin, end) of
  /// linear pixel offsets, in increasing order.
  template <typename F>
  void for_each_interval(F&& f) const {
    std::int64_t pos = 0;
    for (std::size_t i = 0; i < runs_.size(); ++i) {
      const std::int64_t next = pos + runs_[i];
      if (i % 2 == 1) f(pos, next);
      pos = next;
    }
  }

  friend bool operator==(const Mask& a, const Mask& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.runs_ == b.runs_;
  }

 private:
  Mask(int width, int height, std::vector<Run> runs, std::int64_t area);

  int width_;
  int height_;
  std::vector<Run> runs_;
  std::int64_t area_;

  friend class MaskBuilder;
};

/// Incrementally builds a canonical mask from foreground intervals given
/// in increasing order. Touching or overlapping intervals are coalesced.
class MaskBuilder {
 public:
  MaskBuilder(int width, int height);

  /// Adds [begin, end). `begin` must not precede the start of the previous
  /// interval.
  void add(std::int64_t begin, std::int64_t end);
  Mask build() &&;

 private:
  int width_;
  int height_;
  std::vector<Mask::Run> runs_;
  std::int64_t last_end_ = 0;
  std::int64_t area_ = 0;
};

struct Box {
  int x0, y0, x1, y1;  // inclusive pixel bounds

  std::int64_t area() const {
    return static_cast<std::int64_t>(x1 - x0 + 1) * (y1 - y0 + 1);
  }
};

Mask rle_encode(std::span<const std::uint8_t> dense, int width, int height);
std::vector<std::uint8_t> rle_decode(const Mask& mask);

inline std::int64_t area(const Mask& mask) { return mask.area(); }

/// |a ∩ b| by merging the two run lists; never decodes.
std::int64_t intersection_area(const Mask& a, const Mask& b);

/// |a ∩ b| / |a ∪ b|, with iou(empty, empty) == 0.
double iou(const Mask& a, const Mask& b);

/// Pixelwise OR. An empty list yields the empty mask of the given shape.
Mask union_merge(std::span<const Mask> masks, int width, int height);

/// Shifts the mask by (dx, dy); pixels leaving the frame are dropped.
Mask translate(const Mask& mask, int dx, int dy);

Mask from_box(const Box& box, int width, int height);
std::optional<Box> bounding_box(const Mask& mask);
double box_iou(const Box& a, const Box& b);

}  // namespace stg
