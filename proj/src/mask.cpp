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

#include "stg/mask.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <utility>

#include "stg/errors.hpp"

namespace stg {
namespace {

void check_shape(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw DimensionError("mask dimensions must be positive, got " +
                         std::to_string(width) + "x" + std::to_string(height));
  }
  if (static_cast<std::int64_t>(width) * height >
      std::numeric_limits<Mask::Run>::max()) {
    throw DimensionError("mask too large for 32-bit runs");
  }
}

void check_same_shape(const Mask& a, const Mask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw DimensionError("mask dimension mismatch: " + std::to_string(a.width()) +
                         "x" + std::to_string(a.height()) + " vs " +
                         std::to_string(b.width()) + "x" +
                         std::to_string(b.height()));
  }
}

// Walks the foreground intervals of a run list.
class IntervalCursor {
 public:
  explicit IntervalCursor(std::span<const Mask::Run> runs) : runs_(runs) {
    if (runs_.size() > 1) {
      begin_ = runs_[0];
      end_ = begin_ + runs_[1];
      index_ = 1;
    }
  }

  bool done() const { return index_ >= runs_.size(); }
  std::int64_t begin() const { return begin_; }
  std::int64_t end() const { return end_; }

  void next() {
    if (index_ + 2 < runs_.size()) {
      begin_ = end_ + runs_[index_ + 1];
      end_ = begin_ + runs_[index_ + 2];
      index_ += 2;
    } else {
      index_ = runs_.size();
    }
  }

 private:
  std::span<const Mask::Run> runs_;
  std::size_t index_ = std::numeric_limits<std::size_t>::max();
  std::int64_t begin_ = 0;
  std::int64_t end_ = 0;
};

// Splits a linear interval into per-row segments: f(y, x_begin, x_end).
template <typename F>
void for_each_row_segment(std::int64_t begin, std::int64_t end, int width, F&& f) {
  while (begin < end) {
    const auto y = static_cast<int>(begin / width);
    const auto row_end = static_cast<std::int64_t>(y + 1) * width;
    const auto stop = std::min(end, row_end);
    f(y, static_cast<int>(begin - static_cast<std::int64_t>(y) * width),
      static_cast<int>(stop - static_cast<std::int64_t>(y) * width));
    begin = stop;
  }
}

}  // namespace

Mask::Mask(int width, int height) : width_(width), height_(height), area_(0) {
  check_shape(width, height);
  runs_.push_back(static_cast<Run>(pixel_count()));
}

Mask::Mask(int width, int height, std::vector<Run> runs, std::int64_t area)
    : width_(width), height_(height), runs_(std::move(runs)), area_(area) {}

Mask Mask::from_runs(int width, int height, std::vector<Run> runs) {
  try {
    check_shape(width, height);
  } catch (const DimensionError& e) {
    throw MalformedMaskError(e.what());
  }
  if (runs.empty()) throw MalformedMaskError("run list is empty");
  std::int64_t total = 0;
  std::int64_t fg = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (i > 0 && runs[i] == 0) {
      throw MalformedMaskError("zero-length run at position " + std::to_string(i));
    }
    total += runs[i];
    if (i % 2 == 1) fg += runs[i];
  }
  const std::int64_t expected = static_cast<std::int64_t>(width) * height;
  if (total != expected) {
    throw MalformedMaskError("runs sum to " + std::to_string(total) +
                             ", expected width*height = " + std::to_string(expected));
  }
  return Mask(width, height, std::move(runs), fg);
}

Mask Mask::full(int width, int height) {
  check_shape(width, height);
  const auto n = static_cast<std::int64_t>(width) * height;
  return Mask(width, height, {0, static_cast<Run>(n)}, n);
}

MaskBuilder::MaskBuilder(int width, int height) : width_(width), height_(height) {
  check_shape(width, height);
}

void MaskBuilder::add(std::int64_t begin, std::int64_t end) {
  const std::int64_t total = static_cast<std::int64_t>(width_) * height_;
  if (begin < 0 || end > total) throw DimensionError("interval outside mask");
  if (end <= begin) return;
  if (!runs_.empty() && begin <= last_end_) {
    if (end > last_end_) {
      runs_.back() += static_cast<Mask::Run>(end - last_end_);
      area_ += end - last_end_;
      last_end_ = end;
    }
    return;
  }
  runs_.push_back(static_cast<Mask::Run>(begin - last_end_));
  runs_.push_back(static_cast<Mask::Run>(end - begin));
  area_ += end - begin;
  last_end_ = end;
}

Mask MaskBuilder::build() && {
  const std::int64_t total = static_cast<std::int64_t>(width_) * height_;
  if (total > last_end_) runs_.push_back(static_cast<Mask::Run>(total - last_end_));
  return Mask(width_, height_, std::move(runs_), area_);
}

Mask rle_encode(std::span<const std::uint8_t> dense, int width, int height) {
  check_shape(width, height);
  if (static_cast<std::int64_t>(dense.size()) !=
      static_cast<std::int64_t>(width) * height) {
    throw DimensionError("grid has " + std::to_string(dense.size()) +
                         " entries, expected " + std::to_string(width) + "x" +
                         std::to_string(height));
  }
  MaskBuilder builder(width, height);
  std::int64_t i = 0;
  const auto n = static_cast<std::int64_t>(dense.size());
  while (i < n) {
    if (dense[i] > 1) throw InputError("grid entries must be 0 or 1");
    if (dense[i] == 0) {
      ++i;
      continue;
    }
    std::int64_t j = i;
    while (j < n && dense[j] == 1) ++j;
    builder.add(i, j);
    i = j;
  }
  return std::move(builder).build();
}

std::vector<std::uint8_t> rle_decode(const Mask& mask) {
  std::vector<std::uint8_t> grid(static_cast<std::size_t>(mask.pixel_count()), 0);
  mask.for_each_interval([&](std::int64_t b, std::int64_t e) {
    std::fill(grid.begin() + b, grid.begin() + e, std::uint8_t{1});
  });
  return grid;
}

std::int64_t intersection_area(const Mask& a, const Mask& b) {
  check_same_shape(a, b);
  if (a.empty() || b.empty()) return 0;
  IntervalCursor ca(a.runs());
  IntervalCursor cb(b.runs());
  std::int64_t overlap = 0;
  while (!ca.done() && !cb.done()) {
    const auto lo = std::max(ca.begin(), cb.begin());
    const auto hi = std::min(ca.end(), cb.end());
    if (hi > lo) overlap += hi - lo;
    if (ca.end() < cb.end()) {
      ca.next();
    } else {
      cb.next();
    }
  }
  return overlap;
}

double iou(const Mask& a, const Mask& b) {
  const auto inter = intersection_area(a, b);
  const auto uni = a.area() + b.area() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

Mask union_merge(std::span<const Mask> masks, int width, int height) {
  MaskBuilder builder(width, height);
  std::vector<std::pair<std::int64_t, std::int64_t>> intervals;
  for (const auto& m : masks) {
    if (m.width() != width || m.height() != height) {
      throw DimensionError("union_merge: mask dimension mismatch");
    }
    m.for_each_interval([&](std::int64_t b, std::int64_t e) { intervals.emplace_back(b, e); });
  }
  std::sort(intervals.begin(), intervals.end());
  for (const auto& [b, e] : intervals) builder.add(b, e);
  return std::move(builder).build();
}

Mask translate(const Mask& mask, int dx, int dy) {
  const int w = mask.width();
  const int h = mask.height();
  MaskBuilder builder(w, h);
  mask.for_each_interval([&](std::int64_t b, std::int64_t e) {
    for_each_row_segment(b, e, w, [&](int y, int xb, int xe) {
      const int ny = y + dy;
      if (ny < 0 || ny >= h) return;
      const int nb = std::max(0, xb + dx);
      const int ne = std::min(w, xe + dx);
      if (ne <= nb) return;
      const auto row = static_cast<std::int64_t>(ny) * w;
      builder.add(row + nb, row + ne);
    });
  });
  return std::move(builder).build();
}

Mask from_box(const Box& box, int width, int height) {
  MaskBuilder builder(width, height);
  const int x0 = std::max(0, box.x0);
  const int x1 = std::min(width - 1, box.x1);
  for (int y = std::max(0, box.y0); y <= std::min(height - 1, box.y1); ++y) {
    if (x1 < x0) break;
    const auto row = static_cast<std::int64_t>(y) * width;
    builder.add(row + x0, row + x1 + 1);
  }
  return std::move(builder).build();
}

std::optional<Box> bounding_box(const Mask& mask) {
  if (mask.empty()) return std::nullopt;
  Box box{mask.width(), mask.height(), -1, -1};
  mask.for_each_interval([&](std::int64_t b, std::int64_t e) {
    for_each_row_segment(b, e, mask.width(), [&](int y, int xb, int xe) {
      box.x0 = std::min(box.x0, xb);
      box.x1 = std::max(box.x1, xe - 1);
      box.y0 = std::min(box.y0, y);
      box.y1 = std::max(box.y1, y);
    });
  });
  return box;
}

double box_iou(const Box& a, const Box& b) {
  const int ix0 = std::max(a.x0, b.x0);
  const int iy0 = std::max(a.y0, b.y0);
  const int ix1 = std::min(a.x1, b.x1);
  const int iy1 = std::min(a.y1, b.y1);
  std::int64_t inter = 0;
  if (ix1 >= ix0 && iy1 >= iy0) {
    inter = static_cast<std::int64_t>(ix1 - ix0 + 1) * (iy1 - iy0 + 1);
  }
  const auto uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

}  // namespace stg
