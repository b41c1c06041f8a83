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

#include "stg/tracker.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

#include "stg/assign.hpp"
#include "stg/errors.hpp"

namespace stg {
namespace {

// IoU benefit between each candidate track head and each detection.
template <typename HeadMask>
Eigen::MatrixXd overlap_matrix(std::size_t n_tracks, HeadMask&& head,
                               std::span<const Detection> dets) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n_tracks), static_cast<Eigen::Index>(dets.size()));
  for (std::size_t t = 0; t < n_tracks; ++t) {
    const Mask& h = head(t);
    for (std::size_t d = 0; d < dets.size(); ++d) {
      m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d)) = iou(h, dets[d].mask);
    }
  }
  return m;
}

}  // namespace

void TrackerConfig::validate() const {
  auto unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (!unit(alpha_low) || !unit(alpha_high)) throw InputError("alpha thresholds must lie in [0, 1]");
  if (alpha_low > alpha_high) throw InputError("alpha_low must not exceed alpha_high");
  if (t_inactive < 0) throw InputError("t_inactive must be non-negative");
  if (!unit(min_match_iou)) throw InputError("min_match_iou must lie in [0, 1]");
  if (!unit(static_overlap_iou)) throw InputError("static_overlap_iou must lie in [0, 1]");
}

Region Track::to_region() const {
  Region region;
  region.id = id;
  for (const auto& e : entries) region.frames.emplace(e.frame, e.mask);
  return region;
}

std::vector<Detection> gate(std::span<const Detection> dets, const TrackerConfig& cfg) {
  std::vector<Detection> kept;
  for (const auto& d : dets) {
    if (d.score >= cfg.alpha_low) kept.push_back(d);
  }
  return kept;
}

FrameDetections merge_moving_static(const FrameDetections& moving, const FrameDetections& statics,
                                    const TrackerConfig& cfg) {
  FrameDetections out;
  for (const auto& [frame, dets] : moving) out[frame] = dets;
  for (const auto& [frame, dets] : statics) {
    auto& slot = out[frame];
    const auto it = moving.find(frame);
    for (const auto& s : dets) {
      bool overlaps = false;
      if (it != moving.end()) {
        overlaps = std::any_of(it->second.begin(), it->second.end(), [&](const Detection& m) {
          return iou(s.mask, m.mask) > cfg.static_overlap_iou;
        });
      }
      if (!overlaps) slot.push_back(s);
    }
  }
  return out;
}

OverlapTracker::OverlapTracker(TrackerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::vector<std::int64_t> OverlapTracker::step(int frame, std::span<const Detection> frame_dets) {
  if (started_ && frame <= last_frame_) {
    throw InputError("tracker frames must increase: got " + std::to_string(frame) + " after " +
                     std::to_string(last_frame_));
  }
  started_ = true;
  last_frame_ = frame;

  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < tracks_.size(); ++k) {
    auto& track = tracks_[k];
    if (track.state == Track::State::inactive) continue;
    if (frame - track.last_active_frame - 1 > cfg_.t_inactive) {
      track.state = Track::State::inactive;
      continue;
    }
    active.push_back(k);
  }

  const auto benefit = overlap_matrix(
      active.size(), [&](std::size_t t) -> const Mask& { return tracks_[active[t]].entries.back().mask; },
      frame_dets);
  const auto matching = solve_max_assignment(benefit);

  std::vector<std::int64_t> assigned(frame_dets.size(), -1);
  for (const auto& [t, d] : matching.pairs) {
    if (benefit(t, d) <= cfg_.min_match_iou) continue;
    auto& track = tracks_[active[t]];
    Detection entry = frame_dets[d];
    entry.frame = frame;
    track.entries.push_back(std::move(entry));
    track.last_active_frame = frame;
    assigned[d] = track.id;
  }
  for (std::size_t d = 0; d < frame_dets.size(); ++d) {
    const auto& det = frame_dets[d];
    if (assigned[d] >= 0) continue;
    if (det.kind != DetectionKind::moving || det.score < cfg_.alpha_high) continue;
    Track track;
    track.id = ++next_id_;
    Detection entry = det;
    entry.frame = frame;
    track.entries.push_back(std::move(entry));
    track.last_active_frame = frame;
    tracks_.push_back(std::move(track));
    assigned[d] = tracks_.back().id;
  }
  return assigned;
}

std::vector<Track> track_sequence(const FrameDetections& dets, const TrackerConfig& cfg) {
  OverlapTracker tracker(cfg);
  for (const auto& [frame, frame_dets] : dets) tracker.step(frame, gate(frame_dets, cfg));
  return std::move(tracker).release();
}

std::vector<Track> bidirectional_track(const FrameDetections& moving, const FrameDetections& statics,
                                       const TrackerConfig& cfg) {
  cfg.validate();
  FrameDetections gated;
  for (const auto& [frame, dets] : merge_moving_static(moving, statics, cfg)) {
    gated[frame] = gate(dets, cfg);
  }

  OverlapTracker tracker(cfg);
  std::map<int, std::vector<char>> used;
  for (const auto& [frame, dets] : gated) {
    const auto assigned = tracker.step(frame, dets);
    auto& flags = used[frame];
    for (const auto id : assigned) flags.push_back(id >= 0 ? 1 : 0);
  }
  std::vector<Track> tracks = std::move(tracker).release();
  if (!cfg.bidirectional) return tracks;

  // Backward pass: every forward track re-enters as active at its first
  // frame, its earliest mask serving as the most recent segmentation.
  struct Head {
    const Mask* mask;
    int frame;
    bool inactive = false;
    std::vector<Detection> prepended;  // descending frames
  };
  std::vector<Head> heads;
  heads.reserve(tracks.size());
  for (const auto& t : tracks) heads.push_back({&t.entries.front().mask, t.first_frame(), false, {}});

  for (auto it = gated.rbegin(); it != gated.rend(); ++it) {
    const int frame = it->first;
    const auto& flags = used[frame];
    std::vector<Detection> free_dets;
    for (std::size_t d = 0; d < it->second.size(); ++d) {
      if (!flags[d]) free_dets.push_back(it->second[d]);
    }
    if (free_dets.empty()) continue;

    std::vector<std::size_t> candidates;
    for (std::size_t k = 0; k < heads.size(); ++k) {
      auto& h = heads[k];
      if (h.inactive || frame >= h.frame) continue;
      if (h.frame - frame - 1 > cfg.t_inactive) {
        h.inactive = true;
        continue;
      }
      candidates.push_back(k);
    }
    if (candidates.empty()) continue;

    const auto benefit = overlap_matrix(
        candidates.size(), [&](std::size_t t) -> const Mask& { return *heads[candidates[t]].mask; },
        free_dets);
    const auto matching = solve_max_assignment(benefit);
    for (const auto& [t, d] : matching.pairs) {
      if (benefit(t, d) <= cfg.min_match_iou) continue;
      auto& h = heads[candidates[t]];
      Detection entry = free_dets[d];
      entry.frame = frame;
      h.prepended.push_back(std::move(entry));
      h.mask = &h.prepended.back().mask;
      h.frame = frame;
    }
  }

  for (std::size_t k = 0; k < tracks.size(); ++k) {
    auto& pre = heads[k].prepended;
    if (pre.empty()) continue;
    std::reverse(pre.begin(), pre.end());
    tracks[k].entries.insert(tracks[k].entries.begin(), std::make_move_iterator(pre.begin()),
                             std::make_move_iterator(pre.end()));
  }
  return tracks;
}

}  // namespace stg
