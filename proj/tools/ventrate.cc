// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

// ventrate: synth | track | estimate | eval | corrupt | downsample | compare
//
// Exit codes: 0 ok, 2 configuration error, 3 malformed input, 4 internal
// invariant violation.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ventrate/evaluation.h"
#include "ventrate/pipeline.h"
#include "ventrate/robustness.h"
#include "ventrate/statistics.h"
#include "ventrate/stream_io.h"
#include "ventrate/synthgen.h"
#include "ventrate/track_io.h"
#include "ventrate/tracker.h"
#include "ventrate/ventilation.h"

namespace fs = std::filesystem;
using namespace ventrate;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitFormat = 3;
constexpr int kExitInvariant = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = kDefaultSeed;
  std::optional<double> fps;
  std::string out_dir = ".";
};

std::ifstream OpenInput(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return in;
}

fs::path OutputPath(const Globals& g, const std::string& name) {
  std::error_code ec;
  fs::create_directories(g.out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + g.out_dir + "'");
  return fs::path(g.out_dir) / name;
}

std::ofstream OpenOutput(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

std::string Num(double v) { return FormatNumber(v); }

std::string OptNum(const std::optional<double>& v) {
  return v ? FormatNumber(*v) : std::string("null");
}

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
  PenScenario scenario;
  std::optional<std::int64_t> max_frames;
  std::optional<double> transition_share;
  bool no_camera_motion = false;
  bool no_split_jitter = false;
  std::string prefix;
};

void AddSynth(CLI::App& app, SynthArgs& a) {
  PenScenario& s = a.scenario;
  app.add_option("--source-id", s.source_id, "Video identifier");
  app.add_option("--n-fish", s.n_fish, "Number of fish")->capture_default_str();
  app.add_option("--width", s.frame_width, "Frame width (px)")->capture_default_str();
  app.add_option("--height", s.frame_height, "Frame height (px)")->capture_default_str();
  app.add_option("--max-frames", a.max_frames, "Truncate the video");
  app.add_option("--vr-median", s.vr_median, "Median rate (cpm)")->capture_default_str();
  app.add_option("--vr-dispersion", s.vr_dispersion, "Sd of log rate")->capture_default_str();
  app.add_option("--open-fraction", s.open_fraction, "Open share of a cycle")->capture_default_str();
  app.add_flag("--no-split-jitter", a.no_split_jitter, "Exact open/closed split");
  app.add_option("--track-length-median", s.track_length_median)->capture_default_str();
  app.add_option("--track-length-sigma", s.track_length_sigma)->capture_default_str();
  app.add_option("--track-length-min", s.track_length_min)->capture_default_str();
  app.add_option("--track-length-max", s.track_length_max)->capture_default_str();
  app.add_option("--dropped-jaw-fraction", s.dropped_jaw_fraction)->capture_default_str();
  app.add_option("--never-close-fraction", s.never_close_fraction)->capture_default_str();
  app.add_option("--miss-prob", s.noise.miss_prob)->capture_default_str();
  app.add_option("--transition-misclass-prob", s.noise.transition_misclass_prob)
      ->capture_default_str();
  app.add_option("--interior-misclass-prob", s.noise.interior_misclass_prob)
      ->capture_default_str();
  app.add_option("--transition-share", a.transition_share,
                 "Calibrate interior flips to this share at transitions");
  app.add_option("--bbox-jitter", s.noise.bbox_jitter_px, "Corner jitter sd (px)")
      ->capture_default_str();
  app.add_option("--confidence-alpha", s.noise.confidence_alpha)->capture_default_str();
  app.add_option("--confidence-beta", s.noise.confidence_beta)->capture_default_str();
  app.add_option("--camera-jitter", s.camera_jitter_px, "Camera step sd (px)")
      ->capture_default_str();
  app.add_option("--camera-reversion", s.camera_reversion)->capture_default_str();
  app.add_flag("--no-camera-motion", a.no_camera_motion,
               "Withhold camera motion from the stream");
  app.add_flag("--crowding", s.crowding, "Dense overlapping lanes");
  app.add_option("--cell-width", s.cell_width)->capture_default_str();
  app.add_option("--lane-height", s.lane_height)->capture_default_str();
  app.add_option("--lane-cooldown", s.lane_cooldown)->capture_default_str();
  app.add_option("--prefix", a.prefix, "Output file name prefix");
}

int RunSynth(const Globals& g, SynthArgs a) {
  PenScenario s = a.scenario;
  s.seed = g.seed;
  if (g.fps) s.fps = *g.fps;
  s.max_frames = a.max_frames;
  s.noise.transition_share = a.transition_share;
  s.emit_camera_motion = !a.no_camera_motion;
  s.split_jitter = !a.no_split_jitter;
  const SyntheticPen pen = Generate(s);
  {
    std::ofstream out = OpenOutput(OutputPath(g, a.prefix + "detections.jsonl"));
    WriteStream(out, pen.meta, pen.frames);
  }
  {
    std::ofstream out = OpenOutput(OutputPath(g, a.prefix + "truth.jsonl"));
    WriteTruth(out, pen.truth);
  }
  std::size_t detections = 0;
  for (const auto& f : pen.frames) detections += f.detections.size();
  std::cout << "fish=" << pen.truth.fish.size() << " frames=" << pen.frames.size()
            << " detections=" << detections
            << " transition_flip_share=" << Num(pen.truth.TransitionFlipShare())
            << "\n";
  return 0;
}

// ---- track ---------------------------------------------------------------

struct TrackArgs {
  std::string input;
  TrackerConfig config;
  bool no_camera_motion = false;
  bool no_nms = false;
  double nms_iou = kDefaultNmsIouThreshold;
  std::size_t max_detections = kDefaultMaxDetections;
  std::string output = "tracks.jsonl";
};

void AddTrack(CLI::App& app, TrackArgs& a) {
  TrackerConfig& c = a.config;
  app.add_option("input", a.input, "Detection stream (JSONL)")->required();
  app.add_option("--high-conf", c.high_conf_threshold)->capture_default_str();
  app.add_option("--low-conf", c.low_conf_threshold)->capture_default_str();
  app.add_option("--match-iou", c.match_threshold)->capture_default_str();
  app.add_option("--second-match-iou", c.second_stage_match_threshold)
      ->capture_default_str();
  app.add_option("--new-track-conf", c.new_track_threshold)->capture_default_str();
  app.add_option("--track-buffer", c.track_buffer_frames)->capture_default_str();
  app.add_flag("--no-camera-motion", a.no_camera_motion, "Disable compensation");
  app.add_flag("--no-nms", a.no_nms, "Skip per-class NMS");
  app.add_option("--nms-iou", a.nms_iou)->capture_default_str();
  app.add_option("--max-detections", a.max_detections)->capture_default_str();
  app.add_option("--output", a.output, "File name inside --out-dir")->capture_default_str();
}

int RunTrack(const Globals& g, TrackArgs a) {
  a.config.use_camera_motion = !a.no_camera_motion;
  try {
    a.config.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::ifstream in = OpenInput(a.input);
  const fs::path out_path = OutputPath(g, a.output);
  DetectionStreamReader reader(in);
  const double fps = g.fps.value_or(reader.meta().fps);
  Tracker tracker(a.config);
  std::int64_t frames = 0;
  double seconds = 0.0;
  while (auto frame = reader.Next()) {
    if (!a.no_nms) {
      frame->detections = Nms(std::move(frame->detections), a.nms_iou, a.max_detections);
    }
    const auto t0 = std::chrono::steady_clock::now();
    tracker.Step(*frame);
    seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    frames = frame->frame_index + 1;
  }
  const std::vector<TrackRecord> tracks = tracker.Records();
  std::ofstream out = OpenOutput(out_path);
  WriteTracks(out, tracks, frames, fps);
  const double throughput = seconds > 0.0 ? tracker.frames_processed() / seconds : 0.0;
  std::cout << "frames=" << tracker.frames_processed() << " tracks=" << tracks.size()
            << " frames_per_sec=" << Num(throughput) << "\n";
  return 0;
}

// ---- estimate ------------------------------------------------------------

struct EstimateArgs {
  std::string input;
  std::string source_id;
};

int RunEstimate(const Globals& g, const EstimateArgs& a) {
  std::ifstream in = OpenInput(a.input);
  const TrackFile file = ReadTracks(in);
  const double fps = g.fps.value_or(file.summary.fps);
  const auto outcomes = EstimateTracks(file.tracks, fps, DeriveSeed(g.seed, "estimate"));
  const PenReport report = MakePenReport(outcomes, file.summary.frames, fps, a.source_id);
  {
    std::ofstream out = OpenOutput(OutputPath(g, "outcomes.jsonl"));
    WriteOutcomes(out, outcomes);
  }
  {
    std::ofstream out = OpenOutput(OutputPath(g, "outcomes.csv"));
    WriteOutcomesCsv(out, outcomes);
  }
  {
    std::ofstream out = OpenOutput(OutputPath(g, "report.json"));
    WritePenReport(out, report);
  }
  {
    std::ofstream out = OpenOutput(OutputPath(g, "histogram.csv"));
    WriteHistogramCsv(out, report);
  }
  std::cout << "tracks=" << report.n_fish << " estimated=" << report.n_after_qc
            << " median_vr_cpm=" << OptNum(report.median_vr_cpm) << "\n";
  return 0;
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
  std::string mode;
  std::string preds;
  std::string truth;
  std::string outcomes;
};

std::vector<ScoredBox> StreamToScored(const DetectionStream& stream) {
  std::vector<ScoredBox> out;
  for (const FrameRecord& f : stream.frames) {
    for (const Detection& d : f.detections) {
      out.push_back({f.frame_index, d.box, d.state, d.confidence});
    }
  }
  return out;
}

int RunEval(const Globals& g, const EvalArgs& a) {
  std::ifstream truth_in = OpenInput(a.truth);
  std::ifstream preds_in = OpenInput(a.preds);
  std::optional<std::ifstream> outcomes_in;
  if (!a.outcomes.empty()) outcomes_in = OpenInput(a.outcomes);
  const fs::path out_path = OutputPath(g, "metrics_" + a.mode + ".json");
  const SyntheticTruth truth = ReadTruth(truth_in);
  const GroundTruthSet gt = TruthToGroundTruthSet(truth);
  std::ostringstream doc;
  doc << "{\"mode\":\"" << a.mode << "\"";

  if (a.mode == "detect") {
    const DetectionStream stream = ReadStream(preds_in);
    const auto scored = StreamToScored(stream);
    const double ap50_thr[] = {0.5};
    const auto coco = CocoIouThresholds();
    const std::span<const MouthState> classes(kAllMouthStates);
    doc << ",\"map50\":" << Num(MeanAveragePrecision(scored, gt.boxes, classes, ap50_thr))
        << ",\"map50_95\":" << Num(MeanAveragePrecision(scored, gt.boxes, classes, coco))
        << ",\"classes\":{";
    bool first = true;
    for (MouthState c : classes) {
      const auto ap = AveragePrecision(scored, gt.boxes, c, 0.5);
      const auto pr = ComputePrecisionRecall(scored, gt.boxes, c, 0.5, 0.5);
      doc << (first ? "" : ",") << "\"" << ToString(c) << "\":{\"ap50\":" << OptNum(ap)
          << ",\"precision\":" << Num(pr.precision) << ",\"recall\":" << Num(pr.recall)
          << "}";
      first = false;
    }
    doc << "}";
  } else if (a.mode == "track") {
    const TrackFile tracks = ReadTracks(preds_in);
    const auto assoc = ComputeAssociationAccuracy(gt.tracks, tracks.tracks);
    const auto pr = TrackingDetectionPr(gt.tracks, tracks.tracks, assoc, kAllMouthStates);
    doc << ",\"association_accuracy\":" << Num(assoc.mean) << ",\"classes\":{";
    bool first = true;
    for (const auto& c : pr) {
      doc << (first ? "" : ",") << "\"" << ToString(c.cls) << "\":{\"precision\":"
          << Num(c.precision) << ",\"recall\":" << Num(c.recall) << "}";
      first = false;
    }
    doc << "}";
  } else if (a.mode == "rates") {
    const TrackFile tracks = ReadTracks(preds_in);
    const double fps = g.fps.value_or(tracks.summary.fps);
    const std::vector<TrackOutcome> outcomes =
        outcomes_in ? ReadOutcomes(*outcomes_in)
                    : EstimateTracks(tracks.tracks, fps, DeriveSeed(g.seed, "estimate"));
    for (TruthRate which : {TruthRate::kAnnotated, TruthRate::kGenerating}) {
      const auto agreement = CompareRates(PairRates(truth, tracks.tracks, outcomes, which));
      doc << ",\"" << (which == TruthRate::kAnnotated ? "annotated" : "generating")
          << "\":{\"n\":" << agreement.n << ",\"pearson_r\":" << OptNum(agreement.pearson)
          << ",\"mae\":" << Num(agreement.mae) << "}";
    }
  } else {
    throw ConfigError("unknown eval mode '" + a.mode + "'");
  }
  doc << "}\n";
  std::ofstream out = OpenOutput(out_path);
  out << doc.str();
  std::cout << doc.str();
  return 0;
}

// ---- corrupt / downsample / compare --------------------------------------

struct CorruptArgs {
  std::vector<std::string> pens;  // name=tracks.jsonl
  std::vector<std::string> comparisons;  // a:b
  std::string kind = "missed_single";
  std::vector<double> incidences = {0.25, 0.5, 0.75, 1.0};
  int replicates = 5;
  int count_min = 1;
  int count_max = 3;
};

std::pair<std::string, std::string> SplitOnce(const std::string& s, char sep) {
  const auto pos = s.find(sep);
  if (pos == std::string::npos || pos == 0 || pos + 1 == s.size()) {
    throw ConfigError("expected 'a" + std::string(1, sep) + "b', got '" + s + "'");
  }
  return {s.substr(0, pos), s.substr(pos + 1)};
}

int RunCorrupt(const Globals& g, const CorruptArgs& a) {
  CorruptionSpec spec;
  try {
    spec.kind = ParseCorruptionKind(a.kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  spec.incidences = a.incidences;
  spec.replicates = a.replicates;
  spec.count_min = a.count_min;
  spec.count_max = a.count_max;
  spec.seed = DeriveSeed(g.seed, "corrupt");
  try {
    spec.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::vector<std::pair<std::string, std::string>> pen_paths;
  for (const auto& p : a.pens) pen_paths.push_back(SplitOnce(p, '='));
  std::vector<std::pair<std::string, std::string>> comparisons;
  for (const auto& c : a.comparisons) comparisons.push_back(SplitOnce(c, ':'));
  std::vector<std::ifstream> inputs;
  for (const auto& [name, path] : pen_paths) inputs.push_back(OpenInput(path));
  const fs::path out_path = OutputPath(g, "robustness_" + a.kind + ".csv");

  std::vector<PenTracks> pens;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    TrackFile file = ReadTracks(inputs[i]);
    pens.push_back({pen_paths[i].first, std::move(file.tracks),
                    g.fps.value_or(file.summary.fps)});
  }
  RobustnessResult result;
  try {
    result = RunRobustness(pens, spec, DeriveSeed(g.seed, "estimate"), comparisons);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::ofstream out = OpenOutput(out_path);
  WriteRobustnessCsv(out, result);
  WriteRobustnessCsv(std::cout, result);
  return 0;
}

struct DownsampleArgs {
  std::string input;
  int factor = 2;
  std::string output = "tracks_downsampled.jsonl";
};

int RunDownsample(const Globals& g, const DownsampleArgs& a) {
  std::ifstream in = OpenInput(a.input);
  const fs::path out_path = OutputPath(g, a.output);
  const TrackFile file = ReadTracks(in);
  std::pair<std::vector<TrackRecord>, double> result;
  try {
    result = DownsampleTracks(file.tracks, a.factor, g.fps.value_or(file.summary.fps));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const std::int64_t frames = (file.summary.frames + a.factor - 1) / a.factor;
  std::ofstream out = OpenOutput(out_path);
  WriteTracks(out, result.first, frames, result.second);
  std::cout << "tracks=" << result.first.size() << " fps=" << Num(result.second) << "\n";
  return 0;
}

struct CompareArgs {
  std::string pen_a;
  std::string pen_b;
};

int RunCompare(const Globals& g, const CompareArgs& a) {
  std::ifstream in_a = OpenInput(a.pen_a);
  std::ifstream in_b = OpenInput(a.pen_b);
  const fs::path out_path = OutputPath(g, "compare.csv");
  const auto rates_a = EstimatedRates(ReadOutcomes(in_a));
  const auto rates_b = EstimatedRates(ReadOutcomes(in_b));
  std::string p = "nan";
  std::string u = "nan";
  if (!rates_a.empty() && !rates_b.empty()) {
    const MannWhitneyResult mw = MannWhitneyU(rates_a, rates_b);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", mw.p_value);
    p = buf;
    u = Num(mw.u);
  }
  std::ostringstream row;
  row << "n_a,n_b,median_a,median_b,u,p_value\n"
      << rates_a.size() << ',' << rates_b.size() << ','
      << OptNum(Median(rates_a)) << ',' << OptNum(Median(rates_b)) << ',' << u << ','
      << p << '\n';
  std::ofstream out = OpenOutput(out_path);
  out << row.str();
  std::cout << row.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fish ventilation-rate estimation from mouth-state detections"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key=value configuration file; flags win");
  Globals g;
  app.add_option("--seed", g.seed, "Global seed")->capture_default_str();
  app.add_option("--fps", g.fps, "Override frames per second");
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic pen");
  AddSynth(*synth_cmd, synth);

  TrackArgs track;
  CLI::App* track_cmd = app.add_subcommand("track", "Track a detection stream");
  AddTrack(*track_cmd, track);

  EstimateArgs estimate;
  CLI::App* estimate_cmd = app.add_subcommand("estimate", "Estimate ventilation rates");
  estimate_cmd->add_option("input", estimate.input, "Tracks file")->required();
  estimate_cmd->add_option("--source-id", estimate.source_id, "Report label");

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Score predictions against truth");
  eval_cmd->add_option("--mode", eval.mode, "detect | track | rates")
      ->required()
      ->check(CLI::IsMember({"detect", "track", "rates"}));
  eval_cmd->add_option("--preds", eval.preds, "Detection stream or tracks file")->required();
  eval_cmd->add_option("--truth", eval.truth, "Truth file from synth")->required();
  eval_cmd->add_option("--outcomes", eval.outcomes, "Outcomes file (rates mode)");

  CorruptArgs corrupt;
  CLI::App* corrupt_cmd = app.add_subcommand("corrupt", "Robustness to tracking errors");
  corrupt_cmd->add_option("--pen", corrupt.pens, "name=tracks.jsonl")->required();
  corrupt_cmd->add_option("--compare", corrupt.comparisons, "normal:high pen names");
  corrupt_cmd->add_option("--kind", corrupt.kind,
                          "missed_single | missed_adjacent_pair | identity_switch")
      ->capture_default_str();
  corrupt_cmd->add_option("--incidence", corrupt.incidences)->capture_default_str();
  corrupt_cmd->add_option("--replicates", corrupt.replicates)->capture_default_str();
  corrupt_cmd->add_option("--count-min", corrupt.count_min)->capture_default_str();
  corrupt_cmd->add_option("--count-max", corrupt.count_max)->capture_default_str();

  DownsampleArgs down;
  CLI::App* down_cmd = app.add_subcommand("downsample", "Drop frames from a tracks file");
  down_cmd->add_option("input", down.input, "Tracks file")->required();
  down_cmd->add_option("--factor", down.factor)->capture_default_str();
  down_cmd->add_option("--output", down.output)->capture_default_str();

  CompareArgs compare;
  CLI::App* compare_cmd = app.add_subcommand("compare", "Mann-Whitney test of two pens");
  compare_cmd->add_option("pen_a", compare.pen_a, "Outcomes file")->required();
  compare_cmd->add_option("pen_b", compare.pen_b, "Outcomes file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*synth_cmd) return RunSynth(g, synth);
    if (*track_cmd) return RunTrack(g, track);
    if (*estimate_cmd) return RunEstimate(g, estimate);
    if (*eval_cmd) return RunEval(g, eval);
    if (*corrupt_cmd) return RunCorrupt(g, corrupt);
    if (*down_cmd) return RunDownsample(g, down);
    if (*compare_cmd) return RunCompare(g, compare);
  } catch (const ConfigError& e) {
    std::cerr << "ventrate: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ScenarioError& e) {
    std::cerr << "ventrate: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FormatError& e) {
    std::cerr << "ventrate: " << e.what() << "\n";
    return kExitFormat;
  } catch (const std::exception& e) {
    std::cerr << "ventrate: internal error: " << e.what() << "\n";
    return kExitInvariant;
  }
  return kExitInvariant;
}
