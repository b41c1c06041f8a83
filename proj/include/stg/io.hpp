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

// File formats. All readers fail closed with FormatError; nothing is
// repaired. JSON documents carry "format_version": 1.
//
//   label map   binary PGM (P5), maxval 255 (1 byte/px) or 65535 (2 bytes/px,
//               big-endian); value 0 is background
//   manifest    {format_version, sequence, width, height, ignore_value,
//                frames: [{index, labels: "<path relative to manifest>"}]}
//   detections  {format_version, width, height,
//                frames: [{index, detections: [{score, kind, rle}]}]}
//   tracks      {format_version, width, height,
//                tracks: [{id, frames: [{index, score, rle}]}]}
//
// "kind" is "moving" or "static"; "rle" is the canonical run list of
// stg::Mask. Detection and track documents are written as one line of
// compact JSON followed by a newline, so write(read(file)) reproduces a
// written file byte for byte.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stg/metrics.hpp"
#include "stg/sequence.hpp"
#include "stg/tracker.hpp"

namespace stg {

inline constexpr int kFormatVersion = 1;

LabelMap parse_pgm(std::string_view bytes, const std::string& source = "<memory>");
std::string format_pgm(const LabelMap& map);
LabelMap read_labelmap(const std::filesystem::path& path);
void write_labelmap(const LabelMap& map, const std::filesystem::path& path);

struct ManifestFrame {
  int index = 0;
  std::string labels;  // relative to the manifest directory
};

struct Manifest {
  std::string sequence;
  int width = 0;
  int height = 0;
  Label ignore_value = 255;
  std::vector<ManifestFrame> frames;
  /// Free-form provenance (e.g. generator settings); written verbatim when
  /// non-empty, ignored on read.
  std::string generator_json;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// Reads a manifest and every label map it references.
GroundTruthSequence load_ground_truth(const std::filesystem::path& manifest_path);

struct DetectionFile {
  int width = 0;
  int height = 0;
  FrameDetections frames;
};

DetectionFile parse_detections(std::string_view text, const std::string& source = "<memory>");
std::string format_detections(const DetectionFile& file);
DetectionFile read_detections(const std::filesystem::path& path);
void write_detections(const DetectionFile& file, const std::filesystem::path& path);

struct TrackFile {
  int width = 0;
  int height = 0;
  std::vector<Track> tracks;
};

TrackFile parse_tracks(std::string_view text, const std::string& source = "<memory>");
std::string format_tracks(const TrackFile& file);
TrackFile read_tracks(const std::filesystem::path& path);
void write_tracks(const TrackFile& file, const std::filesystem::path& path);

/// Pretty-printed JSON report: {format_version, metric, aggregate,
/// sequences}; every score field is present, null when not computed.
std::string format_report_json(const MetricReport& report);
/// One row per sequence plus a final "aggregate" row.
std::string format_report_csv(const MetricReport& report);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace stg
