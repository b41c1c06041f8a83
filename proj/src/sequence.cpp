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

#include "stg/sequence.hpp"

#include <string>

#include "stg/errors.hpp"

namespace stg {

LabeledFrame encode_label_map(const LabelMap& map, Label ignore_value) {
  if (static_cast<std::int64_t>(map.labels.size()) !=
      static_cast<std::int64_t>(map.width) * map.height) {
    throw DimensionError("label map size does not match its dimensions");
  }
  std::map<Label, MaskBuilder> builders;
  MaskBuilder ignore(map.width, map.height);
  const auto n = static_cast<std::int64_t>(map.labels.size());
  std::int64_t i = 0;
  while (i < n) {
    const Label label = map.labels[i];
    std::int64_t j = i + 1;
    while (j < n && map.labels[j] == label) ++j;
    if (label == ignore_value) {
      ignore.add(i, j);
    } else if (label != 0) {
      auto it = builders.find(label);
      if (it == builders.end()) it = builders.emplace(label, MaskBuilder(map.width, map.height)).first;
      it->second.add(i, j);
    }
    i = j;
  }
  LabeledFrame frame{{}, std::move(ignore).build()};
  frame.instances.reserve(builders.size());
  for (auto& [label, builder] : builders) frame.instances.emplace_back(label, std::move(builder).build());
  return frame;
}

LabelMap decode_labeled_frame(const LabeledFrame& frame, Label ignore_value) {
  LabelMap map(frame.ignore.width(), frame.ignore.height());
  auto paint = [&](const Mask& m, Label value) {
    m.for_each_interval([&](std::int64_t b, std::int64_t e) {
      for (auto p = b; p < e; ++p) map.labels[p] = value;
    });
  };
  for (const auto& [label, mask] : frame.instances) paint(mask, label);
  paint(frame.ignore, ignore_value);
  return map;
}

GroundTruthSequence::GroundTruthSequence(std::string name, int width, int height,
                                         Label ignore_value)
    : name_(std::move(name)), width_(width), height_(height), ignore_value_(ignore_value) {
  if (width <= 0 || height <= 0) throw DimensionError("sequence dimensions must be positive");
  if (ignore_value == 0) throw InputError("ignore value must differ from background (0)");
}

void GroundTruthSequence::add_frame(int index, const LabelMap& labels) {
  if (labels.width != width_ || labels.height != height_) {
    throw DimensionError("label map for frame " + std::to_string(index) +
                         " does not match sequence dimensions");
  }
  add_frame(index, encode_label_map(labels, ignore_value_));
}

void GroundTruthSequence::add_frame(int index, LabeledFrame frame) {
  if (frame.ignore.width() != width_ || frame.ignore.height() != height_) {
    throw DimensionError("frame " + std::to_string(index) + " does not match sequence dimensions");
  }
  for (const auto& [label, mask] : frame.instances) {
    if (label == 0 || label == ignore_value_) {
      throw InputError("instance label " + std::to_string(label) + " is reserved");
    }
    if (mask.width() != width_ || mask.height() != height_) {
      throw DimensionError("instance mask does not match sequence dimensions");
    }
  }
  if (!frames_.emplace(index, std::move(frame)).second) {
    throw InputError("duplicate annotated frame " + std::to_string(index));
  }
}

std::vector<int> GroundTruthSequence::frame_indices() const {
  std::vector<int> out;
  out.reserve(frames_.size());
  for (const auto& [index, frame] : frames_) out.push_back(index);
  return out;
}

std::vector<Region> GroundTruthSequence::regions() const {
  std::map<Label, Region> by_label;
  for (const auto& [index, frame] : frames_) {
    for (const auto& [label, mask] : frame.instances) {
      auto& region = by_label[label];
      region.id = label;
      region.frames.emplace(index, mask);
    }
  }
  std::vector<Region> out;
  out.reserve(by_label.size());
  for (auto& [label, region] : by_label) out.push_back(std::move(region));
  return out;
}

Region GroundTruthSequence::ignore_region() const {
  Region region;
  region.id = ignore_value_;
  for (const auto& [index, frame] : frames_) region.frames.emplace(index, frame.ignore);
  return region;
}

}  // namespace stg
