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
#include <string>
#include <utility>
#include <vector>

#include "stg/mask.hpp"

namespace stg {

using Label = std::uint32_t;

/// Dense per-pixel instance labels, row-major.
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<Label> labels;

  LabelMap() = default;
  LabelMap(int w, int h, Label fill = 0)
      : width(w), height(h), labels(static_cast<std::size_t>(w) * h, fill) {}

  Label& at(int x, int y) { return labels[static_cast<std::size_t>(y) * width + x]; }
  Label at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

/// Spatio-temporal pixel set of one object: frame index -> mask.
struct Region {
  std::int64_t id = 0;
  std::map<int, Mask> frames;
};

/// One annotated frame in run-length form: a mask per instance label
/// (ascending label) plus the mask of ignore-labelled pixels.
struct LabeledFrame {
  std::vector<std::pair<Label, Mask>> instances;
  Mask ignore;
};

/// Splits a dense label map into per-label masks in a single pass.
/// Label 0 is background; `ignore_value` pixels go to the ignore mask.
LabeledFrame encode_label_map(const LabelMap& map, Label ignore_value);
LabelMap decode_labeled_frame(const LabeledFrame& frame, Label ignore_value);

/// Sparse instance annotations of one video.
class GroundTruthSequence {
 public:
  GroundTruthSequence(std::string name, int width, int height, Label ignore_value);

  const std::string& name() const { return name_; }
  int width() const { return width_; }
  int height() const { return height_; }
  Label ignore_value() const { return ignore_value_; }

  /// Throws InputError on a duplicate frame and DimensionError on a shape
  /// mismatch.
  void add_frame(int index, const LabelMap& labels);
  void add_frame(int index, LabeledFrame frame);

  const std::map<int, LabeledFrame>& frames() const { return frames_; }
  std::vector<int> frame_indices() const;

  /// Ground-truth regions g_j, ascending by label id.
  std::vector<Region> regions() const;
  /// Ignore-labelled pixels on every annotated frame.
  Region ignore_region() const;

 private:
  std::string name_;
  int width_;
  int height_;
  Label ignore_value_;
  std::map<int, LabeledFrame> frames_;
};

}  // namespace stg
