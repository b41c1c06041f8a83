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

#include "stg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "stg/errors.hpp"

namespace stg {
namespace {

enum Stream : std::uint32_t { kPlacement = 0, kObjectNoise = 1, kSpurious = 2 };

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::uint32_t frame = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), frame};
  return std::mt19937_64(seq);
}

// [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Integer in [lo, hi].
int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  const auto span = static_cast<double>(hi - lo + 1);
  return lo + std::min(hi - lo, static_cast<int>(std::floor(uniform01(rng) * span)));
}

struct ObjectState {
  int w, h;
  double x, y, vx, vy;
};

void reflect(double& pos, double& vel, double limit) {
  if (limit <= 0) {
    pos = 0;
    return;
  }
  // Bounce until inside; a speed larger than the free range may need more
  // than one reflection.
  while (pos < 0 || pos > limit) {
    if (pos < 0) {
      pos = -pos;
    } else {
      pos = 2 * limit - pos;
    }
    vel = -vel;
  }
}

void paint(LabelMap& map, const ObjectState& o, Shape shape, Label label) {
  const int x0 = static_cast<int>(std::floor(o.x + 0.5));
  const int y0 = static_cast<int>(std::floor(o.y + 0.5));
  const double cx = x0 + o.w / 2.0;
  const double cy = y0 + o.h / 2.0;
  for (int y = std::max(0, y0); y < std::min(map.height, y0 + o.h); ++y) {
    for (int x = std::max(0, x0); x < std::min(map.width, x0 + o.w); ++x) {
      if (shape == Shape::ellipse) {
        const double ex = (x + 0.5 - cx) / (o.w / 2.0);
        const double ey = (y + 0.5 - cy) / (o.h / 2.0);
        if (ex * ex + ey * ey > 1.0) continue;
      }
      map.at(x, y) = label;
    }
  }
}

}  // namespace

void SynthConfig::validate() const {
  if (frames <= 0) throw InputError("frames must be positive");
  if (width <= 0 || height <= 0) throw InputError("width and height must be positive");
  if (objects < 1) throw InputError("objects must be at least 1");
  if (min_size < 1 || max_size < min_size) throw InputError("invalid object size range");
  if (!(min_speed >= 0) || !(max_speed >= min_speed)) throw InputError("invalid speed range");
  if (static_frames < 0) throw InputError("static_frames must be non-negative");
  if (label_every < 1) throw InputError("label_every must be at least 1");
  if (ignore_value == 0 || static_cast<std::int64_t>(objects) >= ignore_value) {
    throw InputError("ignore value must exceed every object label");
  }
  for (const auto& e : occlusions) {
    if (e.object < 0 || e.object >= objects || e.duration < 0) {
      throw InputError("invalid occlusion event");
    }
  }
  auto rate = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (noise.jitter_px < 0 || !rate(noise.fp_rate) || !rate(noise.fn_rate) ||
      !std::isfinite(noise.score_mean) || !(noise.score_spread >= 0)) {
    throw InputError("invalid noise configuration");
  }
}

SynthSequence generate(const SynthConfig& cfg, std::string name) {
  cfg.validate();
  auto rng = make_rng(cfg.seed, kPlacement);

  std::vector<ObjectState> objects;
  for (int k = 0; k < cfg.objects; ++k) {
    ObjectState o{};
    o.w = uniform_int(rng, cfg.min_size, cfg.max_size);
    o.h = uniform_int(rng, cfg.min_size, cfg.max_size);
    if (o.w > cfg.width || o.h > cfg.height) {
      throw PlacementError("object " + std::to_string(k) + " (" + std::to_string(o.w) + "x" +
                           std::to_string(o.h) + ") does not fit in the frame");
    }
    o.x = uniform(rng, 0.0, cfg.width - o.w);
    o.y = uniform(rng, 0.0, cfg.height - o.h);
    const double sx = uniform(rng, cfg.min_speed, cfg.max_speed);
    const double sy = uniform(rng, cfg.min_speed, cfg.max_speed);
    o.vx = uniform01(rng) < 0.5 ? -sx : sx;
    o.vy = uniform01(rng) < 0.5 ? -sy : sy;
    objects.push_back(o);
  }

  SynthSequence out{GroundTruthSequence(std::move(name), cfg.width, cfg.height, cfg.ignore_value),
                    {}, {}};
  for (int k = 0; k < cfg.objects; ++k) {
    Track t;
    t.id = k + 1;
    out.tracks.push_back(std::move(t));
  }

  for (int frame = 0; frame < cfg.frames; ++frame) {
    const bool moving = frame >= cfg.static_frames;
    if (moving && frame > 0) {
      for (auto& o : objects) {
        o.x += o.vx;
        o.y += o.vy;
        reflect(o.x, o.vx, cfg.width - o.w);
        reflect(o.y, o.vy, cfg.height - o.h);
      }
    }
    LabelMap map(cfg.width, cfg.height);
    for (int k = 0; k < cfg.objects; ++k) {
      const bool hidden = std::any_of(cfg.occlusions.begin(), cfg.occlusions.end(), [&](const auto& e) {
        return e.object == k && frame >= e.start_frame && frame < e.start_frame + e.duration;
      });
      if (!hidden) paint(map, objects[k], cfg.shape, static_cast<Label>(k + 1));
    }
    LabeledFrame encoded = encode_label_map(map, cfg.ignore_value);
    for (const auto& [label, mask] : encoded.instances) {
      auto& track = out.tracks[label - 1];
      track.entries.push_back(Detection{frame, 1.0, mask,
                                        moving ? DetectionKind::moving : DetectionKind::static_object});
      track.last_active_frame = frame;
    }
    out.is_static.emplace_back(cfg.objects, !moving);
    if (frame % cfg.label_every == 0) out.ground_truth.add_frame(frame, std::move(encoded));
  }
  std::erase_if(out.tracks, [](const Track& t) { return t.entries.empty(); });
  return out;
}

FrameDetections corrupt(const SynthSequence& seq, const NoiseConfig& noise, std::uint64_t seed) {
  const int w = seq.ground_truth.width();
  const int h = seq.ground_truth.height();
  const int frames = static_cast<int>(seq.is_static.size());
  const auto score = [&](std::mt19937_64& rng) {
    const double s = noise.score_mean + (2.0 * uniform01(rng) - 1.0) * noise.score_spread;
    return std::clamp(s, 0.0, 1.0);
  };

  // Visible mask of every object per frame.
  std::vector<std::vector<const Detection*>> visible(frames);
  for (const auto& track : seq.tracks) {
    for (const auto& e : track.entries) visible[e.frame].push_back(&e);
  }

  FrameDetections out;
  for (int frame = 0; frame < frames; ++frame) {
    auto& dets = out[frame];
    auto rng = make_rng(seed, kObjectNoise, static_cast<std::uint32_t>(frame));
    std::vector<Mask> truth;
    for (const Detection* e : visible[frame]) {
      // Fixed draw order so every object consumes the same stream slice.
      const double u_fn = uniform01(rng);
      const int dx = uniform_int(rng, -noise.jitter_px, noise.jitter_px);
      const int dy = uniform_int(rng, -noise.jitter_px, noise.jitter_px);
      const double s = score(rng);
      truth.push_back(e->mask);
      if (u_fn < noise.fn_rate) continue;
      Mask m = (dx == 0 && dy == 0) ? e->mask : translate(e->mask, dx, dy);
      if (m.empty()) continue;
      dets.push_back(Detection{frame, s, std::move(m), e->kind});
    }

    auto fp_rng = make_rng(seed, kSpurious, static_cast<std::uint32_t>(frame));
    if (uniform01(fp_rng) >= noise.fp_rate) continue;
    const Mask occupied = union_merge(truth, w, h);
    const int max_side = std::max(1, std::min(w, h) / 4);
    const double s = score(fp_rng);
    for (int attempt = 0; attempt < 64; ++attempt) {
      const int bw = uniform_int(fp_rng, 1, max_side);
      const int bh = uniform_int(fp_rng, 1, max_side);
      const int x0 = uniform_int(fp_rng, 0, w - bw);
      const int y0 = uniform_int(fp_rng, 0, h - bh);
      Mask box = from_box(Box{x0, y0, x0 + bw - 1, y0 + bh - 1}, w, h);
      if (intersection_area(box, occupied) == 0) {
        dets.push_back(Detection{frame, s, std::move(box), DetectionKind::moving});
        break;
      }
    }
  }
  return out;
}

}  // namespace stg
