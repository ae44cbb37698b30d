// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ventrate/synthgen.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <queue>
#include <random>
#include <string>

#include "json.hpp"
#include "ventrate/stream_io.h"
#include "ventrate/track_io.h"
#include "ventrate/ventilation.h"

namespace ventrate {
namespace {

using json = nlohmann::json;

constexpr double kFrameMargin = 16.0;
constexpr double kLateralReversion = 0.9;
constexpr double kLateralStep = 0.3;
constexpr double kConstantConfidence = 0.95;
constexpr double kConfidenceFloor = 0.05;

bool Probability(double p) { return p >= 0.0 && p <= 1.0; }

double Normal(Rng& rng, double sd) {
  if (sd <= 0.0) return 0.0;
  return std::normal_distribution<double>(0.0, sd)(rng);
}

double Uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * UniformUnit(rng);
}

double BetaDraw(Rng& rng, double alpha, double beta) {
  const double x = std::gamma_distribution<double>(alpha, 1.0)(rng);
  const double y = std::gamma_distribution<double>(beta, 1.0)(rng);
  return x + y > 0.0 ? x / (x + y) : 0.5;
}

struct Layout {
  int cols = 0;
  int rows = 0;
  double cell_w = 0.0;
  double lane_h = 0.0;
};

Layout MakeLayout(const PenScenario& s) {
  Layout l;
  const double usable_w = s.frame_width - 2.0 * kFrameMargin;
  const double usable_h = s.frame_height - 2.0 * kFrameMargin;
  l.cols = static_cast<int>(std::floor(usable_w / s.cell_width));
  l.rows = static_cast<int>(std::floor(usable_h / s.lane_height));
  if (l.cols < 1 || l.rows < 1) {
    throw ScenarioError("scenario: cells do not fit in the frame");
  }
  l.cell_w = usable_w / l.cols;
  l.lane_h = usable_h / l.rows;
  return l;
}

// Open/closed labels for one fish: cycle k spans [round(kT - phase),
// round((k+1)T - phase)) and opens for round(open_fraction * length) frames.
std::vector<MouthState> MouthStates(const FishAgent& agent, double fps,
                                    const PenScenario& s, Rng& rng) {
  std::vector<MouthState> out(static_cast<std::size_t>(agent.length));
  if (agent.kind == FishKind::kDroppedJaw) {
    std::fill(out.begin(), out.end(), MouthState::kDroppedJaw);
    return out;
  }
  if (agent.kind == FishKind::kNeverCloses) {
    std::fill(out.begin(), out.end(), MouthState::kOpen);
    return out;
  }
  const double period = 60.0 * fps / agent.true_vr;
  for (int k = 0;; ++k) {
    const auto begin = static_cast<std::int64_t>(std::llround(k * period - agent.phase));
    if (begin >= agent.length) break;
    const auto end = static_cast<std::int64_t>(std::llround((k + 1) * period - agent.phase));
    const std::int64_t len = end - begin;
    std::int64_t open = std::llround(s.open_fraction * static_cast<double>(len));
    if (s.split_jitter) open += UniformInt(rng, -1, 1);
    open = std::clamp<std::int64_t>(open, 1, len - 1);
    for (std::int64_t t = std::max<std::int64_t>(begin, 0);
         t < std::min<std::int64_t>(end, agent.length); ++t) {
      out[static_cast<std::size_t>(t)] =
          t - begin < open ? MouthState::kOpen : MouthState::kClosed;
    }
  }
  return out;
}

bool NearTransition(const std::vector<MouthState>& states, std::size_t i) {
  return (i > 0 && states[i - 1] != states[i]) ||
         (i + 1 < states.size() && states[i + 1] != states[i]);
}

BBox ClipToFrame(BBox b, double width, double height) {
  b.x_min = std::clamp(b.x_min, 0.0, width);
  b.x_max = std::clamp(b.x_max, 0.0, width);
  b.y_min = std::clamp(b.y_min, 0.0, height);
  b.y_max = std::clamp(b.y_max, 0.0, height);
  return b;
}

int DrawLength(const PenScenario& s, Rng& rng) {
  const double mu = std::log(s.track_length_median);
  for (int attempt = 0; attempt < 64; ++attempt) {
    const double len = std::round(std::exp(mu + Normal(rng, s.track_length_sigma)));
    if (len >= s.track_length_min && len <= s.track_length_max) {
      return static_cast<int>(len);
    }
  }
  return static_cast<int>(std::clamp(std::round(s.track_length_median),
                                     double(s.track_length_min),
                                     double(s.track_length_max)));
}

}  // namespace

void PenScenario::Validate() const {
  if (n_fish < 0) throw ScenarioError("scenario: n_fish must be >= 0");
  if (!(fps > 0.0)) throw ScenarioError("scenario: fps must be > 0");
  if (frame_width <= 0 || frame_height <= 0) {
    throw ScenarioError("scenario: frame size must be positive");
  }
  if (max_frames && *max_frames < 1) {
    throw ScenarioError("scenario: max_frames must be >= 1");
  }
  if (!(vr_median > 0.0) || vr_dispersion < 0.0) {
    throw ScenarioError("scenario: need vr_median > 0 and vr_dispersion >= 0");
  }
  if (!(open_fraction > 0.0 && open_fraction < 1.0)) {
    throw ScenarioError("scenario: open_fraction must lie in (0, 1)");
  }
  if (track_length_min < 3 || track_length_max < track_length_min ||
      !(track_length_median > 0.0) || track_length_sigma < 0.0) {
    throw ScenarioError("scenario: bad track length distribution");
  }
  for (double p : {dropped_jaw_fraction, never_close_fraction, noise.miss_prob,
                   noise.transition_misclass_prob,
                   noise.interior_misclass_prob}) {
    if (!Probability(p)) {
      throw ScenarioError("scenario: probabilities must lie in [0, 1]");
    }
  }
  if (dropped_jaw_fraction + never_close_fraction > 1.0) {
    throw ScenarioError("scenario: special fish fractions exceed 1");
  }
  if (noise.transition_share &&
      !(*noise.transition_share > 0.0 && *noise.transition_share <= 1.0)) {
    throw ScenarioError("scenario: transition_share must lie in (0, 1]");
  }
  if (noise.bbox_jitter_px < 0.0 || camera_jitter_px < 0.0) {
    throw ScenarioError("scenario: jitter must be >= 0");
  }
  if (noise.confidence_alpha > 0.0 && !(noise.confidence_beta > 0.0)) {
    throw ScenarioError("scenario: confidence_beta must be > 0");
  }
  if (!(camera_reversion >= 0.0 && camera_reversion <= 1.0)) {
    throw ScenarioError("scenario: camera_reversion must lie in [0, 1]");
  }
  if (!(head_width_min > 0.0) || head_width_max < head_width_min ||
      !(head_aspect > 0.0)) {
    throw ScenarioError("scenario: bad head size range");
  }
  if (head_width_max >= frame_width ||
      head_width_max * head_aspect >= frame_height) {
    throw ScenarioError("scenario: fish head larger than the frame");
  }
  if (!(cell_width > 0.0) || !(lane_height > 0.0) || lane_cooldown < 0) {
    throw ScenarioError("scenario: bad lane layout");
  }
  if (head_width_max + 4.0 > cell_width) {
    throw ScenarioError("scenario: fish head wider than its cell");
  }
  if (!crowding && head_width_max * head_aspect + 4.0 > lane_height) {
    throw ScenarioError("scenario: fish head taller than its lane");
  }
  if (speed_min < 0.0 || speed_max < speed_min) {
    throw ScenarioError("scenario: bad speed range");
  }
  MakeLayout(*this);
}

PenScenario NoiseFreeScenario(PenScenario scenario) {
  scenario.noise = DetectorNoise{};
  scenario.camera_jitter_px = 0.0;
  return scenario;
}

std::string_view ToString(FishKind kind) {
  switch (kind) {
    case FishKind::kNormal:
      return "normal";
    case FishKind::kDroppedJaw:
      return "dropped_jaw";
    case FishKind::kNeverCloses:
      return "never_closes";
  }
  return "normal";
}

FishKind ParseFishKind(std::string_view name) {
  for (FishKind k :
       {FishKind::kNormal, FishKind::kDroppedJaw, FishKind::kNeverCloses}) {
    if (ToString(k) == name) return k;
  }
  throw std::invalid_argument("unknown fish kind '" + std::string(name) + "'");
}

double SyntheticTruth::TransitionFlipShare() const {
  const std::size_t total = flips_at_transition + flips_interior;
  return total == 0 ? 0.0
                    : static_cast<double>(flips_at_transition) /
                          static_cast<double>(total);
}

double CalibrateInteriorFlip(const std::vector<FishTruth>& fish,
                             double transition_prob, double share) {
  std::size_t near = 0, interior = 0;
  for (const FishTruth& f : fish) {
    for (std::size_t i = 0; i < f.states.size(); ++i) {
      if (f.states[i] == MouthState::kDroppedJaw) continue;
      (NearTransition(f.states, i) ? near : interior) += 1;
    }
  }
  if (interior == 0 || share >= 1.0) return 0.0;
  const double p = transition_prob * static_cast<double>(near) * (1.0 - share) /
                   (share * static_cast<double>(interior));
  return std::min(p, 1.0);
}

SyntheticPen Generate(const PenScenario& s) {
  s.Validate();
  const Layout layout = MakeLayout(s);
  const int cells = layout.cols * layout.rows;
  const double head_h_max = s.head_width_max * s.head_aspect;

  // Fish attributes, then lane scheduling: each fish takes the cell that
  // frees up first.
  std::vector<FishAgent> agents;
  std::vector<Rng> fish_rngs;
  const std::uint64_t fish_seed = DeriveSeed(s.seed, "fish");
  Rng schedule_rng(DeriveSeed(s.seed, "schedule"));
  using Slot = std::pair<std::int64_t, int>;  // (free from, cell)
  std::priority_queue<Slot, std::vector<Slot>, std::greater<>> free_cells;
  for (int c = 0; c < cells; ++c) {
    const std::int64_t stagger =
        s.crowding ? 0 : UniformInt(schedule_rng, 0, 2 * s.lane_cooldown);
    free_cells.emplace(stagger, c);
  }
  const int cooldown = s.crowding ? 0 : s.lane_cooldown;

  for (int i = 0; i < s.n_fish; ++i) {
    FishAgent a;
    a.fish_id = static_cast<std::int64_t>(agents.size()) + 1;
    Rng rng(DeriveSeed(fish_seed, static_cast<std::uint64_t>(i)));
    const double u = UniformUnit(rng);
    a.kind = u < s.dropped_jaw_fraction ? FishKind::kDroppedJaw
             : u < s.dropped_jaw_fraction + s.never_close_fraction
                 ? FishKind::kNeverCloses
                 : FishKind::kNormal;
    a.true_vr = s.vr_median * std::exp(Normal(rng, s.vr_dispersion));
    a.true_vr = std::clamp(a.true_vr, 1.0, 20.0 * s.fps);  // cycle >= 3 frames
    a.phase = UniformUnit(rng) * 60.0 * s.fps / a.true_vr;
    a.length = DrawLength(s, rng);
    a.head_width = Uniform(rng, s.head_width_min, s.head_width_max);
    a.entry_side = CoinFlip(rng) ? 1 : -1;

    const auto [free_from, cell] = free_cells.top();
    free_cells.pop();
    a.entry_frame = free_from;
    if (s.max_frames) {
      if (a.entry_frame >= *s.max_frames) break;
      a.length = static_cast<int>(
          std::min<std::int64_t>(a.length, *s.max_frames - a.entry_frame));
    }
    free_cells.emplace(a.entry_frame + a.length + cooldown, cell);

    const int col = cell % layout.cols;
    const int row = cell / layout.cols;
    const double cell_left = kFrameMargin + col * layout.cell_w;
    const double room = layout.cell_w - a.head_width - 4.0;
    double speed = Uniform(rng, s.speed_min, s.speed_max);
    if (a.length > 1) speed = std::min(speed, room / (a.length - 1));
    const double travel = speed * (a.length - 1);
    const double slack = (room - travel) * UniformUnit(rng);
    const double left_start = cell_left + 2.0 + 0.5 * a.head_width + slack;
    if (a.entry_side < 0) {
      a.start_x = left_start;
      a.velocity = speed;
    } else {
      a.start_x = left_start + travel;
      a.velocity = -speed;
    }
    a.lane_y = kFrameMargin + (row + 0.5) * layout.lane_h;
    agents.push_back(a);
    fish_rngs.push_back(std::move(rng));
  }

  SyntheticPen pen;
  SyntheticTruth& truth = pen.truth;
  truth.fps = s.fps;
  for (const FishAgent& a : agents) {
    truth.video_length = std::max(truth.video_length, a.entry_frame + a.length);
  }

  // Shared camera translation, mean-reverting around the origin.
  truth.camera_offsets.assign(static_cast<std::size_t>(truth.video_length), {0.0, 0.0});
  {
    Rng rng(DeriveSeed(s.seed, "camera"));
    for (std::size_t t = 1; t < truth.camera_offsets.size(); ++t) {
      for (int axis = 0; axis < 2; ++axis) {
        truth.camera_offsets[t][axis] =
            s.camera_reversion * truth.camera_offsets[t - 1][axis] +
            Normal(rng, s.camera_jitter_px);
      }
    }
  }

  const double lateral_max =
      s.crowding ? 3.0
                 : std::max(0.0, 0.5 * (layout.lane_h - head_h_max) - 2.0);
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const FishAgent& a = agents[i];
    Rng& rng = fish_rngs[i];
    FishTruth f;
    f.agent = a;
    f.states = MouthStates(a, s.fps, s, rng);
    const double w = a.head_width;
    const double h = w * s.head_aspect;
    double lateral = 0.0;
    for (int t = 0; t < a.length; ++t) {
      if (t > 0) {
        lateral = std::clamp(kLateralReversion * lateral + Normal(rng, kLateralStep),
                             -lateral_max, lateral_max);
      }
      const auto& off = truth.camera_offsets[static_cast<std::size_t>(a.entry_frame + t)];
      const BBox box = BBox::FromCenter(a.start_x + a.velocity * t + off[0],
                                        a.lane_y + lateral + off[1], w, h);
      f.boxes.push_back(ClipToFrame(box, s.frame_width, s.frame_height));
    }
    TrackRecord record{f.agent.fish_id, {}};
    for (std::size_t t = 0; t < f.states.size(); ++t) {
      record.entries.push_back(
          {a.entry_frame + static_cast<std::int64_t>(t), f.boxes[t], f.states[t], 1.0});
    }
    Rng unused(0);
    const TrackOutcome outcome = EstimateTrack(record, s.fps, unused);
    if (outcome.estimate) f.annotated_vr = outcome.estimate->rate_cpm;
    truth.fish.push_back(std::move(f));
  }

  const DetectorNoise& noise = s.noise;
  truth.interior_misclass_prob =
      noise.transition_share
          ? CalibrateInteriorFlip(truth.fish, noise.transition_misclass_prob,
                                  *noise.transition_share)
          : noise.interior_misclass_prob;

  pen.frames.resize(static_cast<std::size_t>(truth.video_length));
  for (std::size_t t = 0; t < pen.frames.size(); ++t) {
    FrameRecord& frame = pen.frames[t];
    frame.frame_index = static_cast<std::int64_t>(t);
    if (t > 0 && s.emit_camera_motion && s.camera_jitter_px > 0.0) {
      frame.camera_motion = Affine2D::Translation(
          truth.camera_offsets[t][0] - truth.camera_offsets[t - 1][0],
          truth.camera_offsets[t][1] - truth.camera_offsets[t - 1][1]);
    }
  }

  const std::uint64_t detector_seed = DeriveSeed(s.seed, "detector");
  for (const FishTruth& f : truth.fish) {
    Rng rng(DeriveSeed(detector_seed, static_cast<std::uint64_t>(f.agent.fish_id)));
    for (std::size_t t = 0; t < f.states.size(); ++t) {
      if (noise.miss_prob > 0.0 && UniformUnit(rng) < noise.miss_prob) continue;
      Detection det;
      det.state = f.states[t];
      if (det.state != MouthState::kDroppedJaw) {
        const bool near = NearTransition(f.states, t);
        const double p = near ? noise.transition_misclass_prob
                              : truth.interior_misclass_prob;
        if (p > 0.0 && UniformUnit(rng) < p) {
          det.state = det.state == MouthState::kOpen ? MouthState::kClosed
                                                     : MouthState::kOpen;
          (near ? truth.flips_at_transition : truth.flips_interior) += 1;
        }
      }
      BBox box = f.boxes[t];
      if (noise.bbox_jitter_px > 0.0) {
        box.x_min += Normal(rng, noise.bbox_jitter_px);
        box.y_min += Normal(rng, noise.bbox_jitter_px);
        box.x_max += Normal(rng, noise.bbox_jitter_px);
        box.y_max += Normal(rng, noise.bbox_jitter_px);
        box = ClipToFrame(box, s.frame_width, s.frame_height);
        if (box.x_max - box.x_min < 1.0) box.x_max = box.x_min + 1.0;
        if (box.y_max - box.y_min < 1.0) box.y_max = box.y_min + 1.0;
      }
      det.box = box;
      det.confidence =
          noise.confidence_alpha > 0.0
              ? std::clamp(BetaDraw(rng, noise.confidence_alpha, noise.confidence_beta),
                           kConfidenceFloor, 1.0)
              : kConstantConfidence;
      pen.frames[static_cast<std::size_t>(f.agent.entry_frame) + t]
          .detections.push_back(det);
    }
  }

  pen.meta.fps = s.fps;
  pen.meta.width = s.frame_width;
  pen.meta.height = s.frame_height;
  pen.meta.source_id = s.source_id;
  return pen;
}

GroundTruthSet TruthToGroundTruthSet(const SyntheticTruth& truth) {
  GroundTruthSet gt;
  for (const FishTruth& f : truth.fish) {
    GroundTruthTrack track{f.agent.fish_id, {}};
    for (std::size_t t = 0; t < f.states.size(); ++t) {
      track.entries.push_back(
          {f.first_frame() + static_cast<std::int64_t>(t), f.boxes[t], f.states[t]});
    }
    gt.boxes.insert(gt.boxes.end(), track.entries.begin(), track.entries.end());
    gt.tracks.push_back(std::move(track));
  }
  std::stable_sort(gt.boxes.begin(), gt.boxes.end(),
                   [](const LabeledBox& a, const LabeledBox& b) {
                     return a.frame_index < b.frame_index;
                   });
  return gt;
}

void WriteTruth(std::ostream& out, const SyntheticTruth& truth) {
  std::string line = "{\"truth\":{\"fps\":";
  AppendNumber(line, truth.fps);
  line += ",\"frames\":" + std::to_string(truth.video_length);
  line += ",\"fish\":" + std::to_string(truth.fish.size());
  line += ",\"interior_misclass_prob\":";
  AppendNumber(line, truth.interior_misclass_prob);
  line += ",\"flips_at_transition\":" + std::to_string(truth.flips_at_transition);
  line += ",\"flips_interior\":" + std::to_string(truth.flips_interior);
  line += ",\"camera_offsets\":[";
  for (std::size_t t = 0; t < truth.camera_offsets.size(); ++t) {
    if (t > 0) line += ',';
    line += '[';
    AppendNumber(line, truth.camera_offsets[t][0]);
    line += ',';
    AppendNumber(line, truth.camera_offsets[t][1]);
    line += ']';
  }
  line += "]}}\n";
  out << line;

  for (const FishTruth& f : truth.fish) {
    const FishAgent& a = f.agent;
    line = "{\"fish_id\":" + std::to_string(a.fish_id) + ",\"true_vr\":";
    AppendNumber(line, a.true_vr);
    line += ",\"annotated_vr\":";
    if (f.annotated_vr) {
      AppendNumber(line, *f.annotated_vr);
    } else {
      line += "null";
    }
    line += ",\"kind\":";
    AppendJsonString(line, ToString(a.kind));
    line += ",\"entry_side\":" + std::to_string(a.entry_side);
    line += ",\"velocity\":";
    AppendNumber(line, a.velocity);
    line += ",\"head_width\":";
    AppendNumber(line, a.head_width);
    line += ",\"phase\":";
    AppendNumber(line, a.phase);
    line += ",\"frames\":[";
    for (std::size_t t = 0; t < f.states.size(); ++t) {
      if (t > 0) line += ',';
      line += std::to_string(a.entry_frame + static_cast<std::int64_t>(t));
    }
    line += "],\"boxes\":[";
    for (std::size_t t = 0; t < f.boxes.size(); ++t) {
      if (t > 0) line += ',';
      const BBox& b = f.boxes[t];
      line += '[';
      AppendNumber(line, b.x_min);
      line += ',';
      AppendNumber(line, b.y_min);
      line += ',';
      AppendNumber(line, b.x_max);
      line += ',';
      AppendNumber(line, b.y_max);
      line += ']';
    }
    line += "],\"states\":[";
    for (std::size_t t = 0; t < f.states.size(); ++t) {
      if (t > 0) line += ',';
      AppendJsonString(line, ToString(f.states[t]));
    }
    line += "]}\n";
    out << line;
  }
}

SyntheticTruth ReadTruth(std::istream& in) {
  SyntheticTruth truth;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t expected_fish = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(line_no, std::string("invalid JSON: ") + e.what());
    }
    try {
      if (!have_header) {
        const json& h = doc.at("truth");
        truth.fps = h.at("fps").get<double>();
        truth.video_length = h.at("frames").get<std::int64_t>();
        expected_fish = h.at("fish").get<std::size_t>();
        truth.interior_misclass_prob = h.at("interior_misclass_prob").get<double>();
        truth.flips_at_transition = h.at("flips_at_transition").get<std::size_t>();
        truth.flips_interior = h.at("flips_interior").get<std::size_t>();
        for (const json& o : h.at("camera_offsets")) {
          truth.camera_offsets.push_back({o.at(0).get<double>(), o.at(1).get<double>()});
        }
        have_header = true;
        continue;
      }
      FishTruth f;
      FishAgent& a = f.agent;
      a.fish_id = doc.at("fish_id").get<std::int64_t>();
      a.true_vr = doc.at("true_vr").get<double>();
      if (!doc.at("annotated_vr").is_null()) {
        f.annotated_vr = doc.at("annotated_vr").get<double>();
      }
      a.kind = ParseFishKind(doc.at("kind").get<std::string>());
      a.entry_side = doc.at("entry_side").get<int>();
      a.velocity = doc.at("velocity").get<double>();
      a.head_width = doc.at("head_width").get<double>();
      a.phase = doc.at("phase").get<double>();
      const json& frames = doc.at("frames");
      const json& boxes = doc.at("boxes");
      const json& states = doc.at("states");
      if (frames.empty() || frames.size() != boxes.size() ||
          frames.size() != states.size()) {
        throw FormatError(line_no, "frames, boxes and states differ in length");
      }
      a.entry_frame = frames.at(0).get<std::int64_t>();
      a.length = static_cast<int>(frames.size());
      for (std::size_t t = 0; t < frames.size(); ++t) {
        if (frames[t].get<std::int64_t>() != a.entry_frame + static_cast<std::int64_t>(t)) {
          throw FormatError(line_no, "truth frames must be consecutive");
        }
        const json& b = boxes[t];
        f.boxes.push_back(BBox::FromCorners(b.at(0).get<double>(), b.at(1).get<double>(),
                                            b.at(2).get<double>(), b.at(3).get<double>()));
        f.states.push_back(ParseMouthState(states[t].get<std::string>()));
      }
      truth.fish.push_back(std::move(f));
    } catch (const json::exception& e) {
      throw FormatError(line_no, std::string("bad truth record: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw FormatError(line_no, e.what());
    }
  }
  if (!have_header) throw FormatError(line_no, "missing truth header");
  if (truth.fish.size() != expected_fish) {
    throw FormatError(line_no, "fish count does not match header");
  }
  return truth;
}

}  // namespace ventrate
