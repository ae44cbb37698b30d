// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

// Synthetic pens: fish heads crossing the view in lanes, with known
// ventilation rates, a jittering camera and a noisy detector.

#ifndef VENTRATE_SYNTHGEN_H_
#define VENTRATE_SYNTHGEN_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ventrate/detection.h"
#include "ventrate/evaluation.h"
#include "ventrate/geometry.h"
#include "ventrate/seeds.h"

namespace ventrate {

class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DetectorNoise {
  double miss_prob = 0.0;
  // Flip probability for labels within one frame of a true transition.
  double transition_misclass_prob = 0.0;
  double interior_misclass_prob = 0.0;
  // When set, interior_misclass_prob is replaced by the value that puts this
  // share of expected flips next to transitions.
  std::optional<double> transition_share;
  double bbox_jitter_px = 0.0;
  // Beta(alpha, beta) confidences; alpha <= 0 gives a constant 0.95.
  double confidence_alpha = 0.0;
  double confidence_beta = 0.0;
};

struct PenScenario {
  std::string source_id = "synthetic";
  int n_fish = 100;
  double fps = 30.0;
  int frame_width = 1280;
  int frame_height = 960;
  // Stop the video here; later fish are dropped, running ones truncated.
  std::optional<std::int64_t> max_frames;

  double vr_median = 103.0;
  double vr_dispersion = 0.15;  // sd of log rate
  double open_fraction = 11.0 / 17.0;
  bool split_jitter = true;  // open/closed split moves by -1, 0 or +1

  double track_length_median = 69.0;
  double track_length_sigma = 0.45;  // sd of log length
  int track_length_min = 18;
  int track_length_max = 226;

  double dropped_jaw_fraction = 0.0;
  double never_close_fraction = 0.0;

  DetectorNoise noise;

  double camera_jitter_px = 0.0;  // per-frame innovation sd
  double camera_reversion = 0.95;
  bool emit_camera_motion = true;

  // Lane layout. Crowding packs smaller cells with no idle time between
  // fish and lets neighbouring lanes overlap.
  bool crowding = false;
  double cell_width = 320.0;
  double lane_height = 80.0;
  int lane_cooldown = 36;
  double head_width_min = 64.0;
  double head_width_max = 96.0;
  double head_aspect = 0.75;
  double speed_min = 0.5;
  double speed_max = 3.0;

  std::uint64_t seed = kDefaultSeed;

  // Throws ScenarioError.
  void Validate() const;
};

// A scenario with every detector and camera error switched off.
PenScenario NoiseFreeScenario(PenScenario scenario);

enum class FishKind : std::uint8_t { kNormal, kDroppedJaw, kNeverCloses };
std::string_view ToString(FishKind kind);
FishKind ParseFishKind(std::string_view name);

struct FishAgent {
  std::int64_t fish_id = 0;
  std::int64_t entry_frame = 0;
  int entry_side = -1;  // -1 enters on the left, +1 on the right
  double velocity = 0.0;  // px/frame, signed
  double start_x = 0.0;   // head centre at entry, before camera offset
  double lane_y = 0.0;
  double head_width = 0.0;
  double true_vr = 0.0;
  double phase = 0.0;  // frames into the first cycle
  FishKind kind = FishKind::kNormal;
  int length = 0;
};

struct FishTruth {
  FishAgent agent;
  // Rate obtained by running the estimator on the true mouth states.
  std::optional<double> annotated_vr;
  std::vector<BBox> boxes;  // image coordinates, one per frame
  std::vector<MouthState> states;

  std::int64_t first_frame() const { return agent.entry_frame; }
  std::int64_t last_frame() const {
    return agent.entry_frame + static_cast<std::int64_t>(states.size()) - 1;
  }
};

struct SyntheticTruth {
  double fps = 30.0;
  std::int64_t video_length = 0;
  std::vector<FishTruth> fish;
  std::vector<std::array<double, 2>> camera_offsets;  // per frame
  double interior_misclass_prob = 0.0;  // after calibration
  std::size_t flips_at_transition = 0;
  std::size_t flips_interior = 0;

  double TransitionFlipShare() const;
};

struct SyntheticPen {
  SyntheticTruth truth;
  VideoMeta meta;
  std::vector<FrameRecord> frames;
};

// Deterministic in scenario.seed. Throws ScenarioError.
SyntheticPen Generate(const PenScenario& scenario);

// Interior flip probability giving `share` of expected flips at transitions.
double CalibrateInteriorFlip(const std::vector<FishTruth>& fish,
                             double transition_prob, double share);

GroundTruthSet TruthToGroundTruthSet(const SyntheticTruth& truth);

// Header line with fps, length, camera offsets and flip counts, then one
// line per fish: {fish_id, true_vr, annotated_vr, kind, frames, boxes,
// states}.
void WriteTruth(std::ostream& out, const SyntheticTruth& truth);
SyntheticTruth ReadTruth(std::istream& in);  // throws FormatError

}  // namespace ventrate

#endif  // VENTRATE_SYNTHGEN_H_
