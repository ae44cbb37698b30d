// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

// Corruption of detected tracks (missed detections, adjacent missed pairs,
// identity switches) and frame-rate downsampling, used to measure how the
// pen-level median rate reacts to tracking failures.

#ifndef VENTRATE_ROBUSTNESS_H_
#define VENTRATE_ROBUSTNESS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ventrate/seeds.h"
#include "ventrate/track_io.h"

namespace ventrate {

enum class CorruptionKind : std::uint8_t {
  kMissedSingle,
  kMissedAdjacentPair,
  kIdentitySwitch
};
std::string_view ToString(CorruptionKind kind);
CorruptionKind ParseCorruptionKind(std::string_view name);

struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::kMissedSingle;
  int count_min = 1;
  int count_max = 3;
  std::vector<double> incidences = {0.25, 0.5, 0.75, 1.0};
  int replicates = 5;
  std::uint64_t seed = kDefaultSeed;

  // Throws std::invalid_argument.
  void Validate() const;
};

// Removes k interior entries, pairwise non-adjacent, uniformly over all such
// choices. nullopt (track left alone) when the track is too short.
std::optional<TrackRecord> CorruptMissedSingle(const TrackRecord& track, int k,
                                               Rng& rng);

// Removes k interior runs of exactly two consecutive entries; runs never
// touch the endpoints or each other.
std::optional<TrackRecord> CorruptMissedAdjacent(const TrackRecord& track,
                                                 int k, Rng& rng);

// Splits the track at k distinct interior cut points into k + 1 fragments
// that take ids from `next_id` onwards (advancing it).
std::optional<std::vector<TrackRecord>> CorruptIdentitySwitch(
    const TrackRecord& track, int k, Rng& rng, TrackId& next_id);

struct PenTracks {
  std::string name;
  std::vector<TrackRecord> tracks;
  double fps = 30.0;
};

struct RobustnessRow {
  std::string pen;
  CorruptionKind kind = CorruptionKind::kMissedSingle;
  double incidence = 0.0;
  int replicate = 0;
  double baseline_median_vr = 0.0;
  double median_vr = 0.0;
  double delta_mvr = 0.0;
  double ci_low = 0.0;   // over replicates of delta_mvr
  double ci_high = 0.0;
  // Largest p of this pen's designated comparisons in this replicate.
  std::optional<double> mann_whitney_p;
  std::size_t skipped_tracks = 0;
};

struct ComparisonOutcome {
  std::string pen_a, pen_b;
  double incidence = 0.0;
  int replicate = 0;
  double p_value = 1.0;
};

struct RobustnessResult {
  std::vector<RobustnessRow> rows;
  std::vector<ComparisonOutcome> comparisons;
};

// For every incidence and replicate: draw a fresh subset of each pen's
// tracks, corrupt each chosen track with a count uniform in
// [count_min, count_max], re-estimate and compare the pen median with the
// uncorrupted one. `comparisons` names (normal, high) pen pairs whose
// Mann-Whitney p is recorded per replicate. Pens without an uncorrupted
// estimate are reported with NaN deltas.
RobustnessResult RunRobustness(
    std::span<const PenTracks> pens, const CorruptionSpec& spec,
    std::uint64_t estimation_seed,
    std::span<const std::pair<std::string, std::string>> comparisons = {});

// pen,kind,incidence,replicate,median_vr,delta_mvr,ci_low,ci_high,
// mann_whitney_p
void WriteRobustnessCsv(std::ostream& out, const RobustnessResult& result);

// Keeps entries whose frame index is a multiple of `factor` and renumbers
// them index / factor. Tracks left empty are dropped. Returns the new fps.
std::pair<std::vector<TrackRecord>, double> DownsampleTracks(
    std::span<const TrackRecord> tracks, int factor, double fps);

}  // namespace ventrate

#endif  // VENTRATE_ROBUSTNESS_H_
