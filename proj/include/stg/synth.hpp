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

// Deterministic synthetic sequences of moving shapes with exact ground
// truth, and controllable corruption of that ground truth into detections.
//
// Randomness comes only from std::mt19937_64 (its output sequence is fixed
// by the C++ standard) seeded through std::seed_seq, and is mapped to
// numbers by the helpers in synth.cpp rather than by the
// implementation-defined <random> distributions. The scheme is identified
// as kRngScheme in written manifests.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stg/sequence.hpp"
#include "stg/tracker.hpp"

namespace stg {

inline constexpr const char* kRngScheme = "mt19937_64+seed_seq/v1";

enum class Shape { rectangle, ellipse };

struct OcclusionEvent {
  int object = 0;
  int start_frame = 0;
  int duration = 0;
};

struct NoiseConfig {
  int jitter_px = 0;          // uniform integer shift in [-jitter, jitter] per axis
  double score_mean = 1.0;    // scores ~ U[mean - spread, mean + spread], clamped to [0, 1]
  double score_spread = 0.0;
  double fp_rate = 0.0;       // probability of one spurious detection per frame
  double fn_rate = 0.0;       // probability of dropping each true detection
};

struct SynthConfig {
  std::uint64_t seed = 0;
  int frames = 30;
  int width = 64;
  int height = 48;
  int objects = 2;
  Shape shape = Shape::rectangle;
  int min_size = 8;            // object side / diameter range in pixels
  int max_size = 16;
  double min_speed = 0.5;      // per-axis speed range, px/frame
  double max_speed = 2.0;
  int static_frames = 0;       // objects hold still for the first N frames
  int label_every = 1;         // annotate every k-th frame
  Label ignore_value = 255;
  std::vector<OcclusionEvent> occlusions;
  NoiseConfig noise;

  /// Throws InputError on an invalid field.
  void validate() const;
};

/// Raised when an object does not fit in the frame.
class PlacementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SynthSequence {
  GroundTruthSequence ground_truth;
  /// One track per object, id = label; only frames where it is visible.
  std::vector<Track> tracks;
  /// Per frame, for every object: whether it is in its static phase.
  std::vector<std::vector<bool>> is_static;
};

SynthSequence generate(const SynthConfig& cfg, std::string name = "synth");

/// Corrupts visible ground truth into per-frame detections. Objects in
/// their static phase yield static-kind detections, all others moving.
/// Spurious detections are moving boxes disjoint from every object.
FrameDetections corrupt(const SynthSequence& seq, const NoiseConfig& noise, std::uint64_t seed);

}  // namespace stg
