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

#include "stg/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "stg/errors.hpp"

namespace stg {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& source, const std::string& path, const std::string& msg) {
  throw FormatError(source + ": " + (path.empty() ? "" : path + ": ") + msg);
}

// Typed access to JSON fields with path-to-field diagnostics.
class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  json parse(std::string_view text) const {
    try {
      return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
      fail(source_, "", std::string("invalid JSON: ") + e.what());
    }
  }

  const json& field(const json& obj, const char* key, const std::string& path) const {
    if (!obj.is_object()) fail(source_, path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(source_, join(path, key), "missing field");
    return *it;
  }

  std::int64_t integer(const json& v, const std::string& path, std::int64_t lo,
                       std::int64_t hi) const {
    std::int64_t out = 0;
    if (v.is_number_unsigned()) {
      const auto u = v.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        fail(source_, path, "integer out of range");
      }
      out = static_cast<std::int64_t>(u);
    } else if (v.is_number_integer()) {
      out = v.get<std::int64_t>();
    } else {
      fail(source_, path, "expected an integer");
    }
    if (out < lo || out > hi) {
      fail(source_, path, "value " + std::to_string(out) + " outside [" + std::to_string(lo) +
                              ", " + std::to_string(hi) + "]");
    }
    return out;
  }

  int integer_field(const json& obj, const char* key, const std::string& path, std::int64_t lo,
                    std::int64_t hi) const {
    return static_cast<int>(integer(field(obj, key, path), join(path, key), lo, hi));
  }

  double score(const json& obj, const std::string& path) const {
    const json& v = field(obj, "score", path);
    const std::string p = join(path, "score");
    if (!v.is_number()) fail(source_, p, "expected a number");
    const double s = v.get<double>();
    if (!std::isfinite(s) || s < 0.0 || s > 1.0) fail(source_, p, "score must lie in [0, 1]");
    return s;
  }

  const json& array(const json& obj, const char* key, const std::string& path) const {
    const json& v = field(obj, key, path);
    if (!v.is_array()) fail(source_, join(path, key), "expected an array");
    return v;
  }

  std::string string(const json& obj, const char* key, const std::string& path) const {
    const json& v = field(obj, key, path);
    if (!v.is_string()) fail(source_, join(path, key), "expected a string");
    return v.get<std::string>();
  }

  Mask mask(const json& obj, const std::string& path, int width, int height) const {
    const json& runs_json = array(obj, "rle", path);
    const std::string p = join(path, "rle");
    std::vector<Mask::Run> runs;
    runs.reserve(runs_json.size());
    for (std::size_t k = 0; k < runs_json.size(); ++k) {
      runs.push_back(static_cast<Mask::Run>(integer(runs_json[k], p + "[" + std::to_string(k) + "]", 0,
                                                    std::numeric_limits<Mask::Run>::max())));
    }
    try {
      Mask m = Mask::from_runs(width, height, std::move(runs));
      if (m.empty()) fail(source_, p, "mask is empty");
      return m;
    } catch (const MalformedMaskError& e) {
      fail(source_, p, e.what());
    }
  }

  void version(const json& doc) const {
    integer_field(doc, "format_version", "", kFormatVersion, kFormatVersion);
  }

  static std::string join(const std::string& path, const char* key) {
    return path.empty() ? std::string(key) : path + "." + key;
  }
  static std::string at(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

constexpr std::int64_t kMaxDim = 1 << 16;

ordered_json rle_json(const Mask& m) {
  ordered_json runs = ordered_json::array();
  for (const auto r : m.runs()) runs.push_back(r);
  return runs;
}

ordered_json optional_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json scores_json(const SequenceScores& s) {
  ordered_json j;
  j["name"] = s.name;
  j["precision"] = optional_json(s.precision);
  j["recall"] = optional_json(s.recall);
  j["f_measure"] = optional_json(s.f_measure);
  j["n_over_075"] = s.n_over_075 ? ordered_json(*s.n_over_075) : ordered_json(nullptr);
  j["delta_obj"] = optional_json(s.delta_obj);
  j["ap_box"] = optional_json(s.ap_box);
  j["ap_mask"] = optional_json(s.ap_mask);
  j["j_mean"] = optional_json(s.j_mean);
  j["j_recall"] = optional_json(s.j_recall);
  j["j_decay"] = optional_json(s.j_decay);
  j["f_boundary"] = optional_json(s.f_boundary);
  j["degenerate"] = s.degenerate;
  j["note"] = s.note;
  return j;
}

std::string csv_cell(const std::optional<double>& v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", *v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void csv_row(std::ostringstream& os, const SequenceScores& s) {
  os << csv_quote(s.name) << ',' << csv_cell(s.precision) << ',' << csv_cell(s.recall) << ','
     << csv_cell(s.f_measure) << ',' << (s.n_over_075 ? std::to_string(*s.n_over_075) : "") << ','
     << csv_cell(s.delta_obj) << ',' << csv_cell(s.ap_box) << ',' << csv_cell(s.ap_mask) << ','
     << csv_cell(s.j_mean) << ',' << csv_cell(s.j_recall) << ',' << csv_cell(s.j_decay) << ','
     << csv_cell(s.f_boundary) << ',' << (s.degenerate ? 1 : 0) << '\n';
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(path.string() + ": read failed");
  return bytes;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string() + ": write failed");
}

LabelMap parse_pgm(std::string_view bytes, const std::string& source) {
  std::size_t pos = 0;
  if (bytes.substr(0, 2) != "P5") fail(source, "", "not a binary PGM (missing P5 magic)");
  pos = 2;
  auto next_number = [&](const char* what) -> std::int64_t {
    // Whitespace and '#' comments may precede each header token.
    while (pos < bytes.size()) {
      const auto c = static_cast<unsigned char>(bytes[pos]);
      if (std::isspace(c)) {
        ++pos;
      } else if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      fail(source, "", std::string("malformed PGM header: expected ") + what);
    }
    std::int64_t v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > (1 << 20)) fail(source, "", std::string("malformed PGM header: ") + what + " too large");
      ++pos;
    }
    return v;
  };
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    fail(source, "", "malformed PGM header after magic");
  }
  const auto width = next_number("width");
  const auto height = next_number("height");
  const auto maxval = next_number("maxval");
  if (width <= 0 || height <= 0 || width > kMaxDim || height > kMaxDim) {
    fail(source, "", "invalid PGM dimensions");
  }
  if (maxval != 255 && maxval != 65535) {
    fail(source, "", "unsupported PGM maxval " + std::to_string(maxval) + " (need 255 or 65535)");
  }
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    fail(source, "", "malformed PGM header after maxval");
  }
  ++pos;
  const std::size_t bpp = maxval == 255 ? 1 : 2;
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t payload = bytes.size() - pos;
  if (payload < n * bpp) {
    fail(source, "", "truncated PGM payload: " + std::to_string(payload) + " of " +
                         std::to_string(n * bpp) + " bytes");
  }
  if (payload > n * bpp) fail(source, "", "trailing bytes after PGM payload");
  LabelMap map(static_cast<int>(width), static_cast<int>(height));
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (std::size_t i = 0; i < n; ++i) {
    map.labels[i] = bpp == 1 ? p[i] : static_cast<Label>((p[2 * i] << 8) | p[2 * i + 1]);
  }
  return map;
}

std::string format_pgm(const LabelMap& map) {
  Label max_label = 0;
  for (const auto l : map.labels) max_label = std::max(max_label, l);
  if (max_label > 65535) throw InputError("label exceeds 65535, not representable in PGM");
  const bool wide = max_label > 255;
  std::string out = "P5\n" + std::to_string(map.width) + " " + std::to_string(map.height) + "\n" +
                    (wide ? "65535" : "255") + "\n";
  out.reserve(out.size() + map.labels.size() * (wide ? 2 : 1));
  for (const auto l : map.labels) {
    if (wide) out.push_back(static_cast<char>((l >> 8) & 0xff));
    out.push_back(static_cast<char>(l & 0xff));
  }
  return out;
}

LabelMap read_labelmap(const std::filesystem::path& path) {
  return parse_pgm(read_file(path), path.string());
}

void write_labelmap(const LabelMap& map, const std::filesystem::path& path) {
  write_file(path, format_pgm(map));
}

Manifest read_manifest(const std::filesystem::path& path) {
  const Reader r(path.string());
  const json doc = r.parse(read_file(path));
  r.version(doc);
  Manifest m;
  m.sequence = r.string(doc, "sequence", "");
  m.width = r.integer_field(doc, "width", "", 1, kMaxDim);
  m.height = r.integer_field(doc, "height", "", 1, kMaxDim);
  m.ignore_value = static_cast<Label>(r.integer_field(doc, "ignore_value", "", 1, 65535));
  const json& frames = r.array(doc, "frames", "");
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const std::string p = Reader::at("frames", k);
    ManifestFrame f;
    f.index = r.integer_field(frames[k], "index", p, 0, std::numeric_limits<int>::max());
    f.labels = r.string(frames[k], "labels", p);
    if (!m.frames.empty() && f.index <= m.frames.back().index) {
      fail(r.source(), p + ".index", "frame indices must be strictly increasing");
    }
    m.frames.push_back(std::move(f));
  }
  return m;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  ordered_json doc;
  doc["format_version"] = kFormatVersion;
  doc["sequence"] = manifest.sequence;
  doc["width"] = manifest.width;
  doc["height"] = manifest.height;
  doc["ignore_value"] = manifest.ignore_value;
  ordered_json frames = ordered_json::array();
  for (const auto& f : manifest.frames) frames.push_back({{"index", f.index}, {"labels", f.labels}});
  doc["frames"] = std::move(frames);
  if (!manifest.generator_json.empty()) doc["generator"] = ordered_json::parse(manifest.generator_json);
  write_file(path, doc.dump(2) + "\n");
}

GroundTruthSequence load_ground_truth(const std::filesystem::path& manifest_path) {
  const Manifest m = read_manifest(manifest_path);
  GroundTruthSequence gt(m.sequence, m.width, m.height, m.ignore_value);
  const auto dir = manifest_path.parent_path();
  for (const auto& f : m.frames) {
    const auto file = dir / f.labels;
    LabelMap map = read_labelmap(file);
    if (map.width != m.width || map.height != m.height) {
      fail(file.string(), "", "label map is " + std::to_string(map.width) + "x" +
                                  std::to_string(map.height) + ", manifest says " +
                                  std::to_string(m.width) + "x" + std::to_string(m.height));
    }
    gt.add_frame(f.index, map);
  }
  return gt;
}

DetectionFile parse_detections(std::string_view text, const std::string& source) {
  const Reader r(source);
  const json doc = r.parse(text);
  r.version(doc);
  DetectionFile out;
  out.width = r.integer_field(doc, "width", "", 1, kMaxDim);
  out.height = r.integer_field(doc, "height", "", 1, kMaxDim);
  const json& frames = r.array(doc, "frames", "");
  int previous = -1;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const std::string p = Reader::at("frames", k);
    const int index = r.integer_field(frames[k], "index", p, 0, std::numeric_limits<int>::max());
    if (index <= previous) fail(source, p + ".index", "frame indices must be strictly increasing");
    previous = index;
    auto& slot = out.frames[index];
    const json& dets = r.array(frames[k], "detections", p);
    for (std::size_t d = 0; d < dets.size(); ++d) {
      const std::string dp = Reader::at(p + ".detections", d);
      const double score = r.score(dets[d], dp);
      const std::string kind = r.string(dets[d], "kind", dp);
      DetectionKind k_enum;
      if (kind == "moving") {
        k_enum = DetectionKind::moving;
      } else if (kind == "static") {
        k_enum = DetectionKind::static_object;
      } else {
        fail(source, dp + ".kind", "expected \"moving\" or \"static\", got \"" + kind + "\"");
      }
      slot.push_back(Detection{index, score, r.mask(dets[d], dp, out.width, out.height), k_enum});
    }
  }
  return out;
}

std::string format_detections(const DetectionFile& file) {
  ordered_json doc;
  doc["format_version"] = kFormatVersion;
  doc["width"] = file.width;
  doc["height"] = file.height;
  ordered_json frames = ordered_json::array();
  for (const auto& [index, dets] : file.frames) {
    ordered_json list = ordered_json::array();
    for (const auto& d : dets) {
      ordered_json det;
      det["score"] = d.score;
      det["kind"] = d.kind == DetectionKind::moving ? "moving" : "static";
      det["rle"] = rle_json(d.mask);
      list.push_back(std::move(det));
    }
    ordered_json frame;
    frame["index"] = index;
    frame["detections"] = std::move(list);
    frames.push_back(std::move(frame));
  }
  doc["frames"] = std::move(frames);
  return doc.dump() + "\n";
}

DetectionFile read_detections(const std::filesystem::path& path) {
  return parse_detections(read_file(path), path.string());
}

void write_detections(const DetectionFile& file, const std::filesystem::path& path) {
  write_file(path, format_detections(file));
}

TrackFile parse_tracks(std::string_view text, const std::string& source) {
  const Reader r(source);
  const json doc = r.parse(text);
  r.version(doc);
  TrackFile out;
  out.width = r.integer_field(doc, "width", "", 1, kMaxDim);
  out.height = r.integer_field(doc, "height", "", 1, kMaxDim);
  const json& tracks = r.array(doc, "tracks", "");
  std::set<std::int64_t> ids;
  for (std::size_t k = 0; k < tracks.size(); ++k) {
    const std::string p = Reader::at("tracks", k);
    Track track;
    track.id = r.integer(r.field(tracks[k], "id", p), p + ".id", std::numeric_limits<std::int64_t>::min(),
                         std::numeric_limits<std::int64_t>::max());
    if (!ids.insert(track.id).second) fail(source, p + ".id", "duplicate track id " + std::to_string(track.id));
    const json& frames = r.array(tracks[k], "frames", p);
    for (std::size_t f = 0; f < frames.size(); ++f) {
      const std::string fp = Reader::at(p + ".frames", f);
      const int index = r.integer_field(frames[f], "index", fp, 0, std::numeric_limits<int>::max());
      if (!track.entries.empty() && index <= track.entries.back().frame) {
        fail(source, fp + ".index", "frame indices must be strictly increasing");
      }
      track.entries.push_back(Detection{index, r.score(frames[f], fp),
                                        r.mask(frames[f], fp, out.width, out.height),
                                        DetectionKind::moving});
    }
    if (track.entries.empty()) fail(source, p + ".frames", "track has no frames");
    track.last_active_frame = track.entries.back().frame;
    out.tracks.push_back(std::move(track));
  }
  return out;
}

std::string format_tracks(const TrackFile& file) {
  ordered_json doc;
  doc["format_version"] = kFormatVersion;
  doc["width"] = file.width;
  doc["height"] = file.height;
  ordered_json tracks = ordered_json::array();
  for (const auto& t : file.tracks) {
    ordered_json frames = ordered_json::array();
    for (const auto& e : t.entries) {
      ordered_json entry;
      entry["index"] = e.frame;
      entry["score"] = e.score;
      entry["rle"] = rle_json(e.mask);
      frames.push_back(std::move(entry));
    }
    ordered_json track;
    track["id"] = t.id;
    track["frames"] = std::move(frames);
    tracks.push_back(std::move(track));
  }
  doc["tracks"] = std::move(tracks);
  return doc.dump() + "\n";
}

TrackFile read_tracks(const std::filesystem::path& path) {
  return parse_tracks(read_file(path), path.string());
}

void write_tracks(const TrackFile& file, const std::filesystem::path& path) {
  write_file(path, format_tracks(file));
}

std::string format_report_json(const MetricReport& report) {
  ordered_json doc;
  doc["format_version"] = kFormatVersion;
  doc["metric"] = report.metric;
  doc["aggregate"] = scores_json(report.aggregate);
  ordered_json rows = ordered_json::array();
  for (const auto& s : report.per_sequence) rows.push_back(scores_json(s));
  doc["per_sequence"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::string format_report_csv(const MetricReport& report) {
  std::ostringstream os;
  os << "sequence,precision,recall,f_measure,n_over_075,delta_obj,ap_box,ap_mask,j_mean,j_recall,"
        "j_decay,f_boundary,degenerate\n";
  for (const auto& s : report.per_sequence) csv_row(os, s);
  csv_row(os, report.aggregate);
  return os.str();
}

}  // namespace stg
