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

// Overlap-based multi-object tracker: score gating, mask-IoU association
// with Hungarian matching, inactive-track retirement, moving/static merging
// and an optional backward pass that extends tracks into frames before the
// object started moving.

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "stg/mask.hpp"
#include "stg/sequence.hpp"

namespace stg {

struct TrackerConfig {
  double alpha_high = 0.9;
  double alpha_low = 0.7;
  int t_inactive = 10;
  double min_match_iou = 1e-9;
  double static_overlap_iou = 0.5;
  bool bidirectional = false;

  /// Throws InputError unless 0 <= alpha_low <= alpha_high <= 1 and
  /// t_inactive >= 0.
  void validate() const;
};

enum class DetectionKind { moving, static_object };

struct Detection {
  int frame = 0;
  double score = 0;
  Mask mask;
  DetectionKind kind = DetectionKind::moving;
};

/// Detections grouped by frame index.
using FrameDetections = std::map<int, std::vector<Detection>>;

struct Track {
  enum class State { active, inactive };

  std::int64_t id = 0;
  std::vector<Detection> entries;  // strictly increasing frames
  int last_active_frame = 0;
  State state = State::active;

  int first_frame() const { return entries.front().frame; }
  Region to_region() const;
};

/// Detections with score >= alpha_low, in input order.
std::vector<Detection> gate(std::span<const Detection> dets, const TrackerConfig& cfg);

/// Per frame, drops static detections whose IoU with some moving detection
/// exceeds static_overlap_iou. Frames present in either input appear in the
/// output, moving detections first.
FrameDetections merge_moving_static(const FrameDetections& moving, const FrameDetections& statics,
                                    const TrackerConfig& cfg);

/// Sequential forward tracker for one sequence.
class OverlapTracker {
 public:
  explicit OverlapTracker(TrackerConfig cfg);

  /// Associates the (already gated) detections of `frame`, which must come
  /// after every previously stepped frame; throws InputError otherwise.
  /// Returns, per detection, the id of the track it joined or started, or
  /// -1 when it was discarded.
  std::vector<std::int64_t> step(int frame, std::span<const Detection> frame_dets);

  const std::vector<Track>& tracks() const { return tracks_; }
  std::vector<Track> release() && { return std::move(tracks_); }

 private:
  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  std::int64_t next_id_ = 0;
  int last_frame_ = 0;
  bool started_ = false;
};

/// Gates every frame, then folds OverlapTracker::step over the frames in
/// ascending order.
std::vector<Track> track_sequence(const FrameDetections& dets, const TrackerConfig& cfg);

/// Merges moving and static detections, tracks forward, and when
/// cfg.bidirectional is set runs a backward pass that may prepend unused
/// detections to existing tracks. The backward pass never creates tracks.
std::vector<Track> bidirectional_track(const FrameDetections& moving, const FrameDetections& statics,
                                       const TrackerConfig& cfg);

}  // namespace stg
