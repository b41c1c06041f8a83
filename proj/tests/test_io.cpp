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

#include <gtest/gtest.h>

#include <cstring>
#include <random>
#include <string>

#include "stg/errors.hpp"
#include "stg/io.hpp"
#include "stg/metrics.hpp"
#include "stg/synth.hpp"
#include "test_support.hpp"

using namespace stg;
using stg::testing::box;
using stg::testing::det;

namespace {

std::string pgm(const std::string& header, std::initializer_list<int> bytes) {
  std::string s = header;
  for (const int b : bytes) s.push_back(static_cast<char>(b));
  return s;
}

DetectionFile random_detections(std::mt19937_64& rng, int w, int h) {
  DetectionFile file{w, h, {}};
  for (int f = 0; f < 6; ++f) {
    if (rng() % 3 == 0) continue;
    auto& frame = file.frames[f * 2];
    const int n = static_cast<int>(rng() % 4);
    for (int k = 0; k < n; ++k) {
      auto g = stg::testing::random_grid(rng, w, h);
      g[rng() % g.size()] = 1;
      const double score = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      frame.push_back(det(f * 2, score, rle_encode(g, w, h),
                          rng() % 2 ? DetectionKind::moving : DetectionKind::static_object));
    }
  }
  return file;
}

}  // namespace

TEST(Pgm, AllBackground) {
  const LabelMap m = parse_pgm(pgm("P5\n2 2\n255\n", {0, 0, 0, 0}));
  EXPECT_EQ(m.width, 2);
  EXPECT_EQ(m.height, 2);
  EXPECT_EQ(m.labels, (std::vector<Label>{0, 0, 0, 0}));
}

TEST(Pgm, LabelsBecomeRegions) {
  GroundTruthSequence seq("s", 2, 2, 255);
  seq.add_frame(0, parse_pgm(pgm("P5\n2 2\n255\n", {0, 1, 1, 2})));
  const auto regions = seq.regions();
  ASSERT_EQ(regions.size(), 2u);
  EXPECT_EQ(regions[0].id, 1);
  EXPECT_EQ(regions[0].frames.at(0).area(), 2);
  EXPECT_EQ(regions[1].id, 2);
  EXPECT_EQ(regions[1].frames.at(0).area(), 1);
}

TEST(Pgm, SixteenBitBigEndian) {
  const LabelMap m = parse_pgm(pgm("P5 2 1 65535\n", {0x01, 0x02, 0x00, 0xff}));
  EXPECT_EQ(m.labels, (std::vector<Label>{0x0102, 0x00ff}));
  EXPECT_EQ(parse_pgm(format_pgm(m)).labels, m.labels);
}

TEST(Pgm, HeaderComments) {
  const LabelMap m = parse_pgm(pgm("P5\n# made by hand\n1 1\n255\n", {7}));
  EXPECT_EQ(m.labels, (std::vector<Label>{7}));
}

TEST(Pgm, RejectsMalformedInput) {
  EXPECT_THROW(parse_pgm(pgm("P5\n2 2\n255\n", {0, 0, 0})), FormatError);        // truncated
  EXPECT_THROW(parse_pgm(pgm("P5\n2 2\n255\n", {0, 0, 0, 0, 0})), FormatError);  // trailing
  EXPECT_THROW(parse_pgm(pgm("P2\n2 2\n255\n", {0, 0, 0, 0})), FormatError);
  EXPECT_THROW(parse_pgm(pgm("P5\n2 2\n1023\n", {0, 0, 0, 0, 0, 0, 0, 0})), FormatError);
  EXPECT_THROW(parse_pgm(pgm("P5\n2\n", {})), FormatError);
  EXPECT_THROW(parse_pgm(pgm("P5\n0 2\n255\n", {})), FormatError);
  EXPECT_THROW(parse_pgm(""), FormatError);
}

TEST(Pgm, WriterPicksDepth) {
  LabelMap narrow(3, 1);
  narrow.labels = {0, 1, 255};
  EXPECT_EQ(format_pgm(narrow).substr(0, 11), "P5\n3 1\n255\n");
  LabelMap wide(1, 1);
  wide.labels = {256};
  EXPECT_EQ(format_pgm(wide), pgm("P5\n1 1\n65535\n", {0x01, 0x00}));
  wide.labels = {70000};
  EXPECT_THROW(format_pgm(wide), InputError);
}

TEST(Pgm, FileRoundTrip) {
  const auto dir = stg::testing::temp_dir("pgm");
  LabelMap m(5, 3);
  m.at(1, 1) = 4;
  m.at(4, 2) = 255;
  write_labelmap(m, dir / "a.pgm");
  EXPECT_EQ(read_labelmap(dir / "a.pgm").labels, m.labels);
  EXPECT_THROW(read_labelmap(dir / "missing.pgm"), IoError);
}

TEST(Manifest, LoadGroundTruth) {
  const auto dir = stg::testing::temp_dir("manifest");
  LabelMap a(4, 4), b(4, 4);
  a.at(0, 0) = 1;
  b.at(1, 1) = 2;
  b.at(2, 2) = 9;
  std::filesystem::create_directories(dir / "labels");
  write_labelmap(a, dir / "labels" / "0.pgm");
  write_labelmap(b, dir / "labels" / "5.pgm");
  Manifest m{"seq", 4, 4, 9, {{0, "labels/0.pgm"}, {5, "labels/5.pgm"}}, ""};
  write_manifest(m, dir / "manifest.json");
  const Manifest back = read_manifest(dir / "manifest.json");
  EXPECT_EQ(back.sequence, "seq");
  ASSERT_EQ(back.frames.size(), 2u);
  EXPECT_EQ(back.frames[1].labels, "labels/5.pgm");

  const auto gt = load_ground_truth(dir / "manifest.json");
  EXPECT_EQ(gt.frame_indices(), (std::vector<int>{0, 5}));
  EXPECT_EQ(gt.regions().size(), 2u);
  EXPECT_EQ(gt.ignore_region().frames.at(5).area(), 1);

  write_file(dir / "bad.json", R"({"format_version":1,"sequence":"x","width":4,"height":4,"ignore_value":9,)"
                               R"("frames":[{"index":3,"labels":"a"},{"index":3,"labels":"b"}]})");
  EXPECT_THROW(read_manifest(dir / "bad.json"), FormatError);
  Manifest wrong{"seq", 5, 4, 9, {{0, "labels/0.pgm"}}, ""};
  write_manifest(wrong, dir / "wrong.json");
  EXPECT_THROW(load_ground_truth(dir / "wrong.json"), FormatError);
}

TEST(Detections, EmptyFramesList) {
  const auto file = parse_detections(R"({"format_version":1,"width":3,"height":2,"frames":[]})");
  EXPECT_EQ(file.width, 3);
  EXPECT_TRUE(file.frames.empty());
}

TEST(Detections, SingleRoundTrip) {
  DetectionFile file{4, 3, {}};
  file.frames[7].push_back(det(7, 0.123456789012345678, box(4, 3, 1, 0, 2, 1)));
  const DetectionFile back = parse_detections(format_detections(file));
  ASSERT_EQ(back.frames.at(7).size(), 1u);
  const Detection& d = back.frames.at(7)[0];
  EXPECT_EQ(std::memcmp(&d.score, &file.frames[7][0].score, sizeof(double)), 0);
  EXPECT_EQ(d.mask, file.frames[7][0].mask);
  EXPECT_EQ(d.frame, 7);
  EXPECT_EQ(d.kind, DetectionKind::moving);
}

TEST(Detections, RejectsSchemaViolations) {
  const auto bad = [](const std::string& text) { return [text] { parse_detections(text); }; };
  // Runs sum to 5, not 6.
  EXPECT_THROW(bad(R"({"format_version":1,"width":3,"height":2,"frames":[{"index":0,"detections":[{"score":0.5,"kind":"moving","rle":[1,4]}]}]})")(), FormatError);
  EXPECT_THROW(bad(R"({"format_version":1,"width":3,"height":2,"frames":[{"index":0,"detections":[{"score":1.5,"kind":"moving","rle":[1,5]}]}]})")(), FormatError);
  EXPECT_THROW(bad(R"({"format_version":1,"width":3,"height":2,"frames":[{"index":0,"detections":[{"score":0.5,"kind":"parked","rle":[1,5]}]}]})")(), FormatError);
  EXPECT_THROW(bad(R"({"format_version":1,"width":3,"height":2,"frames":[{"index":2,"detections":[]},{"index":1,"detections":[]}]})")(), FormatError);
  EXPECT_THROW(bad(R"({"format_version":2,"width":3,"height":2,"frames":[]})")(), FormatError);
  EXPECT_THROW(bad(R"({"width":3,"height":2,"frames":[]})")(), FormatError);
  EXPECT_THROW(bad(R"({"format_version":1,"width":3,"height":2,"frames":[)")(), FormatError);
  EXPECT_THROW(bad(R"({"format_version":1,"width":3,"height":2,"frames":[{"index":0,"detections":[{"score":0.5,"kind":"moving","rle":[6]}]}]})")(), FormatError);
}

TEST(Detections, DiagnosticsNameTheField) {
  try {
    parse_detections(R"({"format_version":1,"width":3,"height":2,"frames":[{"index":0,"detections":[{"score":"high","kind":"moving","rle":[1,5]}]}]})",
                     "dets.json");
    FAIL() << "accepted a string score";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("dets.json: frames[0].detections[0].score"), std::string::npos) << e.what();
  }
}

TEST(Detections, RandomRoundTripsAreByteExact) {
  std::mt19937_64 rng(41);
  const auto dir = stg::testing::temp_dir("dets");
  for (int trial = 0; trial < 50; ++trial) {
    const DetectionFile file = random_detections(rng, 1 + rng() % 20, 1 + rng() % 20);
    const std::string text = format_detections(file);
    write_detections(file, dir / "d.json");
    EXPECT_EQ(read_file(dir / "d.json"), text);
    const DetectionFile back = read_detections(dir / "d.json");
    ASSERT_EQ(format_detections(back), text);
    for (const auto& [f, dets] : file.frames) {
      for (std::size_t k = 0; k < dets.size(); ++k) {
        ASSERT_EQ(back.frames.at(f)[k].score, dets[k].score);
        ASSERT_EQ(back.frames.at(f)[k].mask, dets[k].mask);
        ASSERT_EQ(back.frames.at(f)[k].kind, dets[k].kind);
      }
    }
  }
}

TEST(Tracks, EmptyAndDuplicates) {
  EXPECT_TRUE(parse_tracks(R"({"format_version":1,"width":2,"height":2,"tracks":[]})").tracks.empty());
  EXPECT_THROW(parse_tracks(R"({"format_version":1,"width":2,"height":2,"tracks":[)"
                            R"({"id":1,"frames":[{"index":0,"score":1,"rle":[0,4]}]},)"
                            R"({"id":1,"frames":[{"index":1,"score":1,"rle":[0,4]}]}]})"),
               FormatError);
  EXPECT_THROW(parse_tracks(R"({"format_version":1,"width":2,"height":2,"tracks":[)"
                            R"({"id":1,"frames":[{"index":3,"score":1,"rle":[0,4]},{"index":3,"score":1,"rle":[0,4]}]}]})"),
               FormatError);
  EXPECT_THROW(parse_tracks(R"({"format_version":1,"width":2,"height":2,"tracks":[{"id":1,"frames":[]}]})"),
               FormatError);
}

TEST(Tracks, TrackerOutputSurvivesFilesWithIdenticalMetrics) {
  SynthConfig cfg;
  cfg.seed = 5;
  cfg.objects = 3;
  const auto seq = generate(cfg);
  NoiseConfig noise;
  noise.jitter_px = 1;
  noise.score_mean = 0.85;
  noise.score_spread = 0.15;
  noise.fp_rate = 0.3;
  const auto tracks = track_sequence(corrupt(seq, noise, 9), TrackerConfig{});
  const auto dir = stg::testing::temp_dir("tracks");
  const TrackFile file{cfg.width, cfg.height, tracks};
  write_tracks(file, dir / "t.json");
  const TrackFile back = read_tracks(dir / "t.json");
  EXPECT_EQ(format_tracks(back), read_file(dir / "t.json"));

  std::vector<Region> a, b;
  for (const auto& t : tracks) a.push_back(t.to_region());
  for (const auto& t : back.tracks) b.push_back(t.to_region());
  for (auto* measure : {&official_measure, &proposed_measure}) {
    EXPECT_EQ(format_report_json(measure(seq.ground_truth, a)), format_report_json(measure(seq.ground_truth, b)));
  }
}

TEST(Reports, JsonAndCsvLayout) {
  MetricReport r;
  r.metric = "proposed";
  SequenceScores s;
  s.name = "seq,1";
  s.precision = 0.5;
  s.recall = 1.0;
  s.f_measure = 2.0 / 3.0;
  r.per_sequence.push_back(s);
  s.name = "aggregate";
  r.aggregate = s;
  const std::string csv = format_report_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "sequence,precision,recall,f_measure,n_over_075,delta_obj,ap_box,ap_mask,j_mean,j_recall,j_decay,"
            "f_boundary,degenerate");
  EXPECT_NE(csv.find("\"seq,1\",0.500000000,1.000000000,0.666666667,,,,,,,,,0"), std::string::npos) << csv;
  EXPECT_NE(csv.find("\naggregate,"), std::string::npos);
  const std::string json = format_report_json(r);
  for (const char* key : {"\"precision\"", "\"n_over_075\": null", "\"f_boundary\": null", "\"per_sequence\""}) {
    EXPECT_NE(json.find(key), std::string::npos) << key;
  }
}
