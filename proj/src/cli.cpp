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

#include "stg/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "stg/errors.hpp"
#include "stg/io.hpp"
#include "stg/metrics.hpp"
#include "stg/synth.hpp"
#include "stg/tracker.hpp"

namespace stg::cli {
namespace {

namespace fs = std::filesystem;

// Configuration problems detected after parsing; mapped to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SynthOptions {
  SynthConfig cfg;
  std::string size = "64x48";
  std::string shape = "rectangle";
  std::vector<std::string> occlusions;
  std::optional<std::uint64_t> noise_seed;
  std::string name = "synth";
  std::string out_dir;
};

struct TrackOptions {
  TrackerConfig cfg;
  std::string detections;
  std::string statics;
  std::string out;
};

struct EvaluateOptions {
  std::vector<std::string> gt;
  std::vector<std::string> pred;
  std::string metric;
  std::string out;
  std::string csv;
  std::string map_mode;
  double iou_threshold = 0.5;
  double binarize_threshold = 0.7;
  double boundary_tolerance_pct = 0.8;
  int jobs = 0;
  bool strict = false;
};

std::pair<int, int> parse_size(const std::string& s) {
  int w = 0, h = 0;
  char x = 0, extra = 0;
  if (std::sscanf(s.c_str(), "%d%c%d%c", &w, &x, &h, &extra) != 3 || (x != 'x' && x != 'X')) {
    throw UsageError("--size expects WxH, got '" + s + "'");
  }
  return {w, h};
}

OcclusionEvent parse_occlusion(const std::string& s) {
  OcclusionEvent e;
  char extra = 0;
  if (std::sscanf(s.c_str(), "%d:%d:%d%c", &e.object, &e.start_frame, &e.duration, &extra) != 3) {
    throw UsageError("--occlude expects OBJECT:START:DURATION, got '" + s + "'");
  }
  return e;
}

// ---------------------------------------------------------------- synth

int cmd_synth(SynthOptions opt, std::ostream& out) {
  auto& cfg = opt.cfg;
  std::tie(cfg.width, cfg.height) = parse_size(opt.size);
  cfg.shape = opt.shape == "ellipse" ? Shape::ellipse : Shape::rectangle;
  for (const auto& o : opt.occlusions) cfg.occlusions.push_back(parse_occlusion(o));
  try {
    cfg.validate();
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  SynthSequence seq = [&] {
    try {
      return generate(cfg, opt.name);
    } catch (const PlacementError& e) {
      throw UsageError(e.what());
    }
  }();
  const std::uint64_t noise_seed = opt.noise_seed.value_or(cfg.seed);
  const FrameDetections dets = corrupt(seq, cfg.noise, noise_seed);

  const fs::path dir(opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir / "labels", ec);
  if (ec) throw IoError(dir.string() + ": " + ec.message());

  Manifest manifest;
  manifest.sequence = opt.name;
  manifest.width = cfg.width;
  manifest.height = cfg.height;
  manifest.ignore_value = cfg.ignore_value;
  for (const auto& [index, frame] : seq.ground_truth.frames()) {
    char name[32];
    std::snprintf(name, sizeof name, "labels/%06d.pgm", index);
    write_labelmap(decode_labeled_frame(frame, cfg.ignore_value), dir / name);
    manifest.frames.push_back({index, name});
  }
  manifest.generator_json = "{\"rng\":\"" + std::string(kRngScheme) + "\",\"seed\":" +
                            std::to_string(cfg.seed) + ",\"noise_seed\":" +
                            std::to_string(noise_seed) + "}";
  write_manifest(manifest, dir / "manifest.json");
  write_tracks(TrackFile{cfg.width, cfg.height, seq.tracks}, dir / "gt_tracks.json");
  write_detections(DetectionFile{cfg.width, cfg.height, dets}, dir / "detections.json");

  std::size_t n_dets = 0;
  for (const auto& [f, d] : dets) n_dets += d.size();
  out << "wrote " << manifest.frames.size() << " label maps, " << seq.tracks.size()
      << " ground-truth tracks, " << n_dets << " detections to " << dir.string() << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------- track

int cmd_track(const TrackOptions& opt, std::ostream& out) {
  try {
    opt.cfg.validate();
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  const DetectionFile main = read_detections(opt.detections);
  FrameDetections moving, statics;
  for (const auto& [frame, dets] : main.frames) {
    auto& m = moving[frame];
    for (const auto& d : dets) {
      if (d.kind == DetectionKind::moving) {
        m.push_back(d);
      } else {
        statics[frame].push_back(d);
      }
    }
  }
  if (!opt.statics.empty()) {
    const DetectionFile extra = read_detections(opt.statics);
    if (extra.width != main.width || extra.height != main.height) {
      throw FormatError(opt.statics + ": dimensions differ from " + opt.detections);
    }
    for (const auto& [frame, dets] : extra.frames) {
      for (auto d : dets) {
        d.kind = DetectionKind::static_object;
        statics[frame].push_back(std::move(d));
      }
    }
  }
  std::vector<Track> tracks = bidirectional_track(moving, statics, opt.cfg);
  write_tracks(TrackFile{main.width, main.height, std::move(tracks)}, opt.out);
  out << "wrote tracks to " << opt.out << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------- evaluate

struct SequenceResult {
  std::string name;
  FbmsCounts counts;
  SequenceScores scores;
  int gt_objects = 0;
  int pred_objects = 0;
  std::vector<std::vector<Mask>> gt_instances;         // map: per labelled frame
  std::vector<std::vector<ScoredMask>> pred_instances;  // map: per labelled frame
};

SequenceResult evaluate_one(const EvaluateOptions& opt, const std::string& gt_path,
                            const std::string& pred_path) {
  const GroundTruthSequence gt = load_ground_truth(gt_path);
  const TrackFile tracks = read_tracks(pred_path);
  if (tracks.width != gt.width() || tracks.height != gt.height()) {
    throw FormatError(pred_path + ": dimensions " + std::to_string(tracks.width) + "x" +
                      std::to_string(tracks.height) + " differ from ground truth " + gt_path);
  }
  SequenceResult r;
  r.name = gt.name();
  r.scores.name = gt.name();
  r.gt_objects = static_cast<int>(gt.regions().size());
  r.pred_objects = static_cast<int>(tracks.tracks.size());

  if (opt.metric == "official" || opt.metric == "proposed") {
    std::vector<Region> preds;
    for (const auto& t : tracks.tracks) preds.push_back(t.to_region());
    r.counts = fbms_counts(gt, preds,
                           opt.metric == "official" ? FbmsMode::official : FbmsMode::proposed);
    return r;
  }
  if (opt.metric == "delta-obj") {
    r.scores.delta_obj = std::abs(r.pred_objects - r.gt_objects);
    return r;
  }

  // Per labelled frame: ground-truth instances and track entries.
  for (const auto& [index, frame] : gt.frames()) {
    std::vector<Mask> g;
    for (const auto& [label, mask] : frame.instances) g.push_back(mask);
    std::vector<ScoredMask> p;
    for (const auto& t : tracks.tracks) {
      const auto it = std::find_if(t.entries.begin(), t.entries.end(),
                                   [&](const Detection& e) { return e.frame == index; });
      if (it != t.entries.end()) p.push_back({it->score, it->mask});
    }
    r.gt_instances.push_back(std::move(g));
    r.pred_instances.push_back(std::move(p));
  }

  if (opt.metric == "map") {
    auto ap = [&](ApMode mode) {
      return average_precision(r.gt_instances, r.pred_instances, opt.iou_threshold, mode);
    };
    if (opt.map_mode != "mask") r.scores.ap_box = ap(ApMode::box);
    if (opt.map_mode != "box") r.scores.ap_mask = ap(ApMode::mask);
    if (!r.scores.ap_box && !r.scores.ap_mask) {
      r.scores.degenerate = true;
      r.scores.note = "no ground-truth instances";
    }
    return r;
  }

  // davis
  std::vector<Mask> gt_binary;
  for (const auto& g : r.gt_instances) gt_binary.push_back(union_merge(g, gt.width(), gt.height()));
  const auto pred_binary =
      binarize_detections(r.pred_instances, gt.width(), gt.height(), opt.binarize_threshold);
  if (gt_binary.empty()) {
    r.scores.degenerate = true;
    r.scores.note = "no annotated frames";
    return r;
  }
  const JStats j = davis_j(gt_binary, pred_binary);
  r.scores.j_mean = j.mean;
  r.scores.j_recall = j.recall;
  r.scores.j_decay = j.decay;
  r.scores.f_boundary = boundary_f(
      gt_binary, pred_binary,
      boundary_tolerance(gt.width(), gt.height(), opt.boundary_tolerance_pct / 100.0));
  return r;
}

std::vector<SequenceResult> evaluate_all(const EvaluateOptions& opt) {
  const std::size_t n = opt.gt.size();
  std::vector<std::optional<SequenceResult>> results(n);
  std::vector<std::exception_ptr> errors(n);
  unsigned jobs = opt.jobs > 0 ? static_cast<unsigned>(opt.jobs) : std::thread::hardware_concurrency();
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));

  auto work = [&](std::size_t k) {
    try {
      results[k] = evaluate_one(opt, opt.gt[k], opt.pred[k]);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (jobs == 1) {
    for (std::size_t k = 0; k < n; ++k) work(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < n; k = next++) work(k);
      });
    }
    for (auto& th : pool) th.join();
  }
  // Report the first failure in sequence order, independent of scheduling.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<SequenceResult> out;
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

MetricReport build_report(const EvaluateOptions& opt, const std::vector<SequenceResult>& results) {
  if (opt.metric == "official" || opt.metric == "proposed") {
    std::vector<std::string> names;
    std::vector<FbmsCounts> counts;
    for (const auto& r : results) {
      names.push_back(r.name);
      counts.push_back(r.counts);
    }
    return fbms_report(names, counts,
                       opt.metric == "official" ? FbmsMode::official : FbmsMode::proposed);
  }

  MetricReport report;
  report.metric = opt.metric;
  for (const auto& r : results) report.per_sequence.push_back(r.scores);
  auto& agg = report.aggregate;
  agg.name = "aggregate";

  if (opt.metric == "delta-obj") {
    std::map<std::string, int> gt_counts, pred_counts;
    for (std::size_t k = 0; k < results.size(); ++k) {
      const std::string key = std::to_string(k) + ":" + results[k].name;
      gt_counts[key] = results[k].gt_objects;
      pred_counts[key] = results[k].pred_objects;
    }
    agg.delta_obj = delta_obj(gt_counts, pred_counts);
  } else if (opt.metric == "map") {
    // Frames of every sequence are pooled into one precision-recall curve.
    std::vector<std::vector<Mask>> gts;
    std::vector<std::vector<ScoredMask>> dets;
    for (const auto& r : results) {
      gts.insert(gts.end(), r.gt_instances.begin(), r.gt_instances.end());
      dets.insert(dets.end(), r.pred_instances.begin(), r.pred_instances.end());
    }
    if (opt.map_mode != "mask") agg.ap_box = average_precision(gts, dets, opt.iou_threshold, ApMode::box);
    if (opt.map_mode != "box") agg.ap_mask = average_precision(gts, dets, opt.iou_threshold, ApMode::mask);
    if (!agg.ap_box && !agg.ap_mask) {
      agg.degenerate = true;
      agg.note = "no ground-truth instances";
    }
  } else {
    double jm = 0, jr = 0, jd = 0, fb = 0;
    int counted = 0;
    for (const auto& r : results) {
      if (!r.scores.j_mean) continue;
      jm += *r.scores.j_mean;
      jr += *r.scores.j_recall;
      jd += *r.scores.j_decay;
      fb += *r.scores.f_boundary;
      ++counted;
    }
    if (counted > 0) {
      agg.j_mean = jm / counted;
      agg.j_recall = jr / counted;
      agg.j_decay = jd / counted;
      agg.f_boundary = fb / counted;
    } else {
      agg.degenerate = true;
      agg.note = "no annotated frames";
    }
  }
  return report;
}

void print_summary(const MetricReport& report, std::ostream& out) {
  char buf[64];
  auto line = [&](const char* key, const std::optional<double>& v) {
    if (!v) return;
    std::snprintf(buf, sizeof buf, "%.6f", *v);
    out << "  " << key << " = " << buf << "\n";
  };
  out << "metric: " << report.metric << " (" << report.per_sequence.size() << " sequences)\n";
  const auto& a = report.aggregate;
  line("precision", a.precision);
  line("recall", a.recall);
  line("F", a.f_measure);
  if (a.n_over_075) out << "  N(F>0.75) = " << *a.n_over_075 << "\n";
  line("delta_obj", a.delta_obj);
  line("ap_box", a.ap_box);
  line("ap_mask", a.ap_mask);
  line("J mean", a.j_mean);
  line("J recall", a.j_recall);
  line("J decay", a.j_decay);
  line("F boundary", a.f_boundary);
  if (report.any_degenerate()) out << "  warning: degenerate evaluation (see report notes)\n";
}

int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out) {
  if (opt.gt.size() != opt.pred.size()) {
    throw FormatError("got " + std::to_string(opt.gt.size()) + " --gt manifests but " +
                      std::to_string(opt.pred.size()) + " --pred track files");
  }
  if (!opt.map_mode.empty() && opt.metric != "map") {
    throw UsageError("--map-mode only applies to --metric map");
  }
  if (!(opt.iou_threshold > 0 && opt.iou_threshold <= 1)) throw UsageError("--iou-threshold must lie in (0, 1]");
  if (!(opt.boundary_tolerance_pct >= 0)) throw UsageError("--boundary-tolerance must be non-negative");
  if (opt.jobs < 0) throw UsageError("--jobs must be non-negative");

  const auto results = evaluate_all(opt);
  const MetricReport report = build_report(opt, results);
  write_file(opt.out, format_report_json(report));
  if (!opt.csv.empty()) write_file(opt.csv, format_report_csv(report));
  print_summary(report, out);
  if (opt.strict && report.any_degenerate()) return kDegenerate;
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatio-temporal segmentation toolkit: synthesize, track, evaluate"};
  app.name("stgeval");
  app.require_subcommand(1);

  SynthOptions synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic sequence with ground truth and detections");
  s->add_option("--seed", synth.cfg.seed, "Generator seed");
  s->add_option("--frames", synth.cfg.frames, "Number of frames")->capture_default_str();
  s->add_option("--objects", synth.cfg.objects, "Number of objects")->capture_default_str();
  s->add_option("--size", synth.size, "Frame size WxH")->capture_default_str();
  s->add_option("--shape", synth.shape, "Object shape")
      ->check(CLI::IsMember({"rectangle", "ellipse"}))
      ->capture_default_str();
  s->add_option("--min-size", synth.cfg.min_size, "Smallest object side in px")->capture_default_str();
  s->add_option("--max-size", synth.cfg.max_size, "Largest object side in px")->capture_default_str();
  s->add_option("--min-speed", synth.cfg.min_speed, "Per-axis speed lower bound, px/frame")->capture_default_str();
  s->add_option("--max-speed", synth.cfg.max_speed, "Per-axis speed upper bound, px/frame")->capture_default_str();
  s->add_option("--static-frames", synth.cfg.static_frames, "Objects hold still for the first N frames");
  s->add_option("--label-every", synth.cfg.label_every, "Annotate every k-th frame")->capture_default_str();
  s->add_option("--ignore-value", synth.cfg.ignore_value, "Label of unlabelled pixels")->capture_default_str();
  s->add_option("--occlude", synth.occlusions, "Hide an object: OBJECT:START:DURATION (repeatable)");
  s->add_option("--jitter", synth.cfg.noise.jitter_px, "Detection shift in px per axis");
  s->add_option("--score-mean", synth.cfg.noise.score_mean, "Mean detection score")->capture_default_str();
  s->add_option("--score-spread", synth.cfg.noise.score_spread, "Half-width of the uniform score range");
  s->add_option("--fp-rate", synth.cfg.noise.fp_rate, "Spurious detection probability per frame");
  s->add_option("--fn-rate", synth.cfg.noise.fn_rate, "Missed detection probability");
  s->add_option("--noise-seed", synth.noise_seed, "Seed for detection noise (default: --seed)");
  s->add_option("--name", synth.name, "Sequence name")->capture_default_str();
  s->add_option("--out", synth.out_dir, "Output directory")->required();

  TrackOptions track;
  auto* t = app.add_subcommand("track", "Link per-frame detections into tracks");
  t->add_option("--detections", track.detections, "Detection file")->required();
  t->add_option("--static", track.statics, "Additional static-object detection file");
  t->add_option("--out", track.out, "Track file to write")->required();
  t->add_option("--alpha-high", track.cfg.alpha_high, "Score needed to start a track")->capture_default_str();
  t->add_option("--alpha-low", track.cfg.alpha_low, "Detections below this score are dropped")->capture_default_str();
  t->add_option("--t-inactive", track.cfg.t_inactive, "Frames a track may go unmatched")->capture_default_str();
  t->add_option("--min-match-iou", track.cfg.min_match_iou, "Minimum IoU of a track-detection link")->capture_default_str();
  t->add_option("--static-overlap-iou", track.cfg.static_overlap_iou,
                "Static detections overlapping a moving one above this IoU are dropped")
      ->capture_default_str();
  t->add_flag("--bidirectional", track.cfg.bidirectional, "Also extend tracks backwards in time");

  EvaluateOptions eval;
  auto* e = app.add_subcommand("evaluate", "Score tracks against ground truth");
  e->add_option("--gt", eval.gt, "Ground-truth manifest(s)")->required();
  e->add_option("--pred", eval.pred, "Track file(s), paired with --gt by position")->required();
  e->add_option("--metric", eval.metric, "Measure to compute")
      ->required()
      ->check(CLI::IsMember({"proposed", "official", "delta-obj", "map", "davis"}));
  e->add_option("--out", eval.out, "Report file (JSON)")->required();
  e->add_option("--csv", eval.csv, "Also write a CSV report");
  e->add_option("--map-mode", eval.map_mode, "Restrict --metric map to box or mask AP")
      ->check(CLI::IsMember({"box", "mask"}));
  e->add_option("--iou-threshold", eval.iou_threshold, "AP match threshold")->capture_default_str();
  e->add_option("--binarize-threshold", eval.binarize_threshold,
                "Score above which instances become foreground (davis)")
      ->capture_default_str();
  e->add_option("--boundary-tolerance", eval.boundary_tolerance_pct,
                "Boundary match distance, percent of the image diagonal (davis)")
      ->capture_default_str();
  e->add_option("--jobs", eval.jobs, "Parallel sequences (0: hardware concurrency)")->capture_default_str();
  e->add_flag("--strict", eval.strict, "Exit with 3 when the evaluation is degenerate");

  std::vector<std::string> argv_storage{"stgeval"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& pe) {
    if (pe.get_exit_code() == 0) {
      app.exit(pe, out, err);
      return kSuccess;
    }
    err << "error: " << pe.what() << "\n" << "run with --help for usage\n";
    return kUsageError;
  }

  try {
    if (s->parsed()) return cmd_synth(synth, out);
    if (t->parsed()) return cmd_track(track, out);
    return cmd_evaluate(eval, out);
  } catch (const UsageError& ue) {
    err << "error: " << ue.what() << "\n" << "run with --help for usage\n";
    return kUsageError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kDataError;
  }
}

}  // namespace stg::cli
