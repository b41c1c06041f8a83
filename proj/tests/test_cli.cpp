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

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "stg/cli.hpp"
#include "stg/io.hpp"
#include "test_support.hpp"

using namespace stg;
namespace fs = std::filesystem;
using stg::testing::box;
using stg::testing::det;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_file(e.path());
  }
  return files;
}

double report_value(const fs::path& report, const std::string& key) {
  const std::string text = read_file(report);
  const auto agg = text.find("\"aggregate\"");
  const auto pos = text.find("\"" + key + "\": ", agg);
  return std::stod(text.substr(pos + key.size() + 4));
}

// Two-instance frame plus three single-frame tracks scored 0.9 (hit),
// 0.8 (miss) and 0.7 (hit).
fs::path write_ap_case(const fs::path& dir) {
  LabelMap map(40, 20);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) {
      map.at(x, y) = 1;
      map.at(x + 20, y) = 2;
    }
  write_labelmap(map, dir / "0.pgm");
  write_manifest(Manifest{"ap", 40, 20, 255, {{0, "0.pgm"}}, ""}, dir / "manifest.json");
  TrackFile tracks{40, 20, {}};
  const std::vector<std::pair<double, Mask>> entries{
      {0.9, box(40, 20, 0, 0, 9, 9)}, {0.8, box(40, 20, 0, 12, 5, 19)}, {0.7, box(40, 20, 20, 0, 29, 9)}};
  for (const auto& [score, mask] : entries) {
    Track t;
    t.id = static_cast<std::int64_t>(tracks.tracks.size()) + 1;
    t.entries.push_back(det(0, score, mask));
    tracks.tracks.push_back(std::move(t));
  }
  write_tracks(tracks, dir / "tracks.json");
  return dir;
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"bogus"}).code, 1);
  EXPECT_EQ(run({"synth", "--out", "/tmp/x", "--no-such-flag"}).code, 1);
  EXPECT_EQ(run({"synth"}).code, 1);
  const auto help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("evaluate"), std::string::npos);
}

TEST(Cli, SynthWritesDataset) {
  const auto dir = stg::testing::temp_dir("cli_synth");
  const auto r = run({"synth", "--seed", "3", "--frames", "6", "--label-every", "2", "--out", (dir / "s").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"manifest.json", "gt_tracks.json", "detections.json", "labels/000000.pgm", "labels/000004.pgm"}) {
    EXPECT_TRUE(fs::exists(dir / "s" / f)) << f;
  }
  EXPECT_FALSE(fs::exists(dir / "s" / "labels/000001.pgm"));
  EXPECT_EQ(load_ground_truth(dir / "s" / "manifest.json").frame_indices(), (std::vector<int>{0, 2, 4}));
}

TEST(Cli, SynthRejectsBadConfig) {
  const auto dir = stg::testing::temp_dir("cli_synth_bad");
  const auto r = run({"synth", "--frames", "0", "--out", dir.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("frames"), std::string::npos);
  EXPECT_EQ(run({"synth", "--size", "64by48", "--out", dir.string()}).code, 1);
  EXPECT_EQ(run({"synth", "--occlude", "0:1", "--out", dir.string()}).code, 1);
  EXPECT_EQ(run({"synth", "--fp-rate", "2", "--out", dir.string()}).code, 1);
  EXPECT_EQ(run({"synth", "--size", "8x8", "--min-size", "20", "--max-size", "20", "--out", dir.string()}).code, 1);
}

TEST(Cli, SynthIsByteIdentical) {
  const auto dir = stg::testing::temp_dir("cli_det");
  const std::vector<std::string> common{"synth", "--seed", "77", "--objects", "3", "--jitter", "1",
                                        "--score-mean", "0.85", "--score-spread", "0.1", "--fp-rate", "0.2"};
  auto a = common, b = common;
  a.insert(a.end(), {"--out", (dir / "a").string()});
  b.insert(b.end(), {"--out", (dir / "b").string()});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  const auto ta = tree(dir / "a"), tb = tree(dir / "b");
  EXPECT_EQ(ta.size(), 3u + 30u);
  EXPECT_EQ(ta, tb);
}

TEST(Cli, TrackValidatesThresholds) {
  const auto dir = stg::testing::temp_dir("cli_track_bad");
  ASSERT_EQ(run({"synth", "--out", dir.string()}).code, 0);
  const auto r = run({"track", "--detections", (dir / "detections.json").string(), "--out",
                      (dir / "t.json").string(), "--alpha-low", "0.95", "--alpha-high", "0.9"});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(fs::exists(dir / "t.json"));
}

TEST(Cli, MalformedInputsExitTwo) {
  const auto dir = stg::testing::temp_dir("cli_bad_files");
  write_file(dir / "bad.json", "{\"format_version\":1,\"width\":2,\"height\":2,\"frames\":[{\"index\":0,"
                               "\"detections\":[{\"score\":0.9,\"kind\":\"moving\",\"rle\":[1,1]}]}]}");
  EXPECT_EQ(run({"track", "--detections", (dir / "bad.json").string(), "--out", (dir / "t.json").string()}).code, 2);
  EXPECT_EQ(run({"track", "--detections", (dir / "missing.json").string(), "--out", (dir / "t.json").string()}).code, 2);
  ASSERT_EQ(run({"synth", "--out", (dir / "s").string()}).code, 0);
  write_file(dir / "s" / "labels" / "000003.pgm", "P5\n64 48\n255\n\x01");
  EXPECT_EQ(run({"evaluate", "--gt", (dir / "s/manifest.json").string(), "--pred",
                 (dir / "s/gt_tracks.json").string(), "--metric", "proposed", "--out", (dir / "r.json").string()})
                .code,
            2);
}

TEST(Cli, PerfectPipelineScoresOne) {
  const auto dir = stg::testing::temp_dir("cli_perfect");
  ASSERT_EQ(run({"synth", "--seed", "2", "--objects", "1", "--out", dir.string()}).code, 0);
  ASSERT_EQ(run({"track", "--detections", (dir / "detections.json").string(), "--out", (dir / "t.json").string()}).code, 0);
  const auto r = run({"evaluate", "--gt", (dir / "manifest.json").string(), "--pred", (dir / "t.json").string(),
                      "--metric", "proposed", "--out", (dir / "report.json").string(), "--csv",
                      (dir / "report.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("F = 1.000000"), std::string::npos) << r.out;
  EXPECT_EQ(report_value(dir / "report.json", "f_measure"), 1.0);
  EXPECT_TRUE(fs::exists(dir / "report.csv"));
}

TEST(Cli, DisjointTrackContrast) {
  const auto dir = stg::testing::temp_dir("cli_contrast");
  ASSERT_EQ(run({"synth", "--seed", "2", "--objects", "1", "--out", dir.string()}).code, 0);
  TrackFile tracks = read_tracks(dir / "gt_tracks.json");
  // A spurious track in a corner the object never reaches on frame 0.
  const Mask object = tracks.tracks[0].entries[0].mask;
  const auto obj_box = *bounding_box(object);
  const int x0 = obj_box.x0 > 10 ? 0 : 60;
  Track fp;
  fp.id = 99;
  fp.entries.push_back(det(0, 1.0, box(64, 48, x0, 0, x0 + 3, 3)));
  ASSERT_EQ(intersection_area(fp.entries[0].mask, object), 0);
  TrackFile with_fp = tracks;
  with_fp.tracks.push_back(fp);
  write_tracks(with_fp, dir / "fp.json");

  std::map<std::string, double> f;
  for (const std::string metric : {"official", "proposed"}) {
    for (const std::string pred : {"gt_tracks.json", "fp.json"}) {
      const auto report = dir / (metric + "_" + pred);
      ASSERT_EQ(run({"evaluate", "--gt", (dir / "manifest.json").string(), "--pred", (dir / pred).string(),
                     "--metric", metric, "--out", report.string()})
                    .code,
                0);
      f[metric + pred] = report_value(report, "f_measure");
    }
  }
  EXPECT_EQ(f["officialgt_tracks.json"], 1.0);
  EXPECT_EQ(f["officialfp.json"], f["officialgt_tracks.json"]);
  EXPECT_LT(f["proposedfp.json"], f["proposedgt_tracks.json"]);
}

TEST(Cli, MapHandCase) {
  const auto dir = write_ap_case(stg::testing::temp_dir("cli_map"));
  const auto r = run({"evaluate", "--gt", (dir / "manifest.json").string(), "--pred", (dir / "tracks.json").string(),
                      "--metric", "map", "--map-mode", "mask", "--out", (dir / "r.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(report_value(dir / "r.json", "ap_mask"), 5.0 / 6.0, 1e-9);
  EXPECT_EQ(run({"evaluate", "--gt", (dir / "manifest.json").string(), "--pred", (dir / "tracks.json").string(),
                 "--metric", "proposed", "--map-mode", "box", "--out", (dir / "r.json").string()})
                .code,
            1);
}

TEST(Cli, EvaluateMetricsAndStrict) {
  const auto dir = stg::testing::temp_dir("cli_metrics");
  ASSERT_EQ(run({"synth", "--seed", "4", "--out", dir.string()}).code, 0);
  const std::string gt = (dir / "manifest.json").string();
  const std::string pred = (dir / "gt_tracks.json").string();
  for (const std::string metric : {"official", "proposed", "delta-obj", "map", "davis"}) {
    const auto r = run({"evaluate", "--gt", gt, "--pred", pred, "--metric", metric, "--out",
                        (dir / (metric + ".json")).string(), "--strict"});
    EXPECT_EQ(r.code, 0) << metric << ": " << r.err;
  }
  EXPECT_EQ(report_value(dir / "delta-obj.json", "delta_obj"), 0.0);
  EXPECT_EQ(report_value(dir / "davis.json", "j_mean"), 1.0);
  EXPECT_EQ(report_value(dir / "davis.json", "f_boundary"), 1.0);

  // Count mismatch between --gt and --pred.
  EXPECT_EQ(run({"evaluate", "--gt", gt, gt, "--pred", pred, "--metric", "proposed", "--out", (dir / "x.json").string()}).code, 2);

  // Empty track file: proposed precision is vacuous, --strict turns it into 3.
  write_tracks(TrackFile{64, 48, {}}, dir / "empty.json");
  const std::vector<std::string> base{"evaluate", "--gt", gt, "--pred", (dir / "empty.json").string(),
                                      "--metric", "proposed", "--out", (dir / "e.json").string()};
  EXPECT_EQ(run(base).code, 0);
  auto strict = base;
  strict.push_back("--strict");
  EXPECT_EQ(run(strict).code, 3);
}

TEST(Cli, ReportsIndependentOfJobs) {
  const auto dir = stg::testing::temp_dir("cli_jobs");
  std::vector<std::string> gts, preds;
  for (int k = 0; k < 5; ++k) {
    const auto sub = dir / ("seq" + std::to_string(k));
    ASSERT_EQ(run({"synth", "--seed", std::to_string(k), "--objects", "3", "--jitter", "2", "--fp-rate", "0.3",
                   "--score-mean", "0.85", "--score-spread", "0.15", "--name", "seq" + std::to_string(k), "--out",
                   sub.string()})
                  .code,
              0);
    ASSERT_EQ(run({"track", "--detections", (sub / "detections.json").string(), "--out",
                   (sub / "t.json").string()})
                  .code,
              0);
    gts.push_back((sub / "manifest.json").string());
    preds.push_back((sub / "t.json").string());
  }
  for (const std::string metric : {"proposed", "official", "map", "davis", "delta-obj"}) {
    std::string first_json, first_csv;
    for (const std::string jobs : {"1", "2", "4"}) {
      std::vector<std::string> args{"evaluate", "--metric", metric, "--jobs", jobs, "--gt"};
      args.insert(args.end(), gts.begin(), gts.end());
      args.push_back("--pred");
      args.insert(args.end(), preds.begin(), preds.end());
      args.insert(args.end(), {"--out", (dir / "r.json").string(), "--csv", (dir / "r.csv").string()});
      ASSERT_EQ(run(args).code, 0) << metric;
      const auto json = read_file(dir / "r.json");
      const auto csv = read_file(dir / "r.csv");
      if (first_json.empty()) {
        first_json = json;
        first_csv = csv;
      } else {
        EXPECT_EQ(json, first_json) << metric << " jobs " << jobs;
        EXPECT_EQ(csv, first_csv) << metric << " jobs " << jobs;
      }
    }
  }
}

TEST(Cli, BidirectionalWithStaticFile) {
  const auto dir = stg::testing::temp_dir("cli_bidir");
  ASSERT_EQ(run({"synth", "--seed", "6", "--objects", "1", "--frames", "30", "--static-frames", "10", "--min-speed",
                 "1", "--out", dir.string()})
                .code,
            0);
  // Split the synthetic detections into a moving file and a static file.
  const DetectionFile all = read_detections(dir / "detections.json");
  DetectionFile moving{all.width, all.height, {}}, statics{all.width, all.height, {}};
  for (const auto& [f, dets] : all.frames)
    for (const auto& d : dets) (d.kind == DetectionKind::moving ? moving : statics).frames[f].push_back(d);
  ASSERT_FALSE(statics.frames.empty());
  for (auto& [f, dets] : statics.frames)
    for (auto& d : dets) d.kind = DetectionKind::moving;  // the flag, not the field, marks them static
  write_detections(moving, dir / "moving.json");
  write_detections(statics, dir / "static.json");

  for (const bool bidir : {false, true}) {
    std::vector<std::string> args{"track", "--detections", (dir / "moving.json").string(), "--static",
                                  (dir / "static.json").string(), "--out", (dir / "t.json").string()};
    if (bidir) args.push_back("--bidirectional");
    ASSERT_EQ(run(args).code, 0);
    const TrackFile t = read_tracks(dir / "t.json");
    ASSERT_EQ(t.tracks.size(), 1u);
    EXPECT_EQ(t.tracks[0].entries.front().frame, bidir ? 0 : 10);
    EXPECT_EQ(t.tracks[0].entries.back().frame, 29);
  }
}
