// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

// Ventilation-rate estimation from a track's mouth-state sequence.
//
// Pipeline, applied per track in this order:
//   1. tracks with a strict majority of dropped-jaw labels are removed; the
//      remaining dropped-jaw labels become missed detections;
//   2. tracks without any closed (or any open) observation stop here;
//   3. single-frame gaps are filled with a coin flip between the neighbours;
//   4. a track holding an open|closed|open singleton is discarded, otherwise
//      each closed|open|closed singleton becomes closed;
//   5. the longest gap-free span is kept and its two flanking runs dropped;
//   6. runs are paired from the first one; the mean pair length is the cycle
//      duration and rate = 60 * fps / duration.

#ifndef VENTRATE_VENTILATION_H_
#define VENTRATE_VENTILATION_H_

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ventrate/detection.h"
#include "ventrate/seeds.h"
#include "ventrate/track_io.h"

namespace ventrate {

enum class MouthSlot : std::uint8_t {
  kOpen = 0,
  kClosed = 1,
  kDroppedJaw = 2,
  kMissing = 3
};

MouthSlot ToSlot(MouthState state);

// One slot per frame from the first to the last associated frame.
struct MouthSequence {
  TrackId track_id = 0;
  std::int64_t start_frame = 0;
  std::vector<MouthSlot> slots;

  std::size_t size() const { return slots.size(); }
  bool empty() const { return slots.empty(); }
  // Inclusive; only meaningful when non-empty.
  std::int64_t end_frame() const {
    return start_frame + static_cast<std::int64_t>(slots.size()) - 1;
  }

  bool operator==(const MouthSequence&) const = default;
};

// Maximal run of identical slots.
struct SlotRun {
  MouthSlot slot;
  std::size_t begin;
  std::size_t length;
};
std::vector<SlotRun> Runs(std::span<const MouthSlot> slots);

// Throws std::invalid_argument for an empty track.
MouthSequence BuildSequence(const TrackRecord& track);

// nullopt when more than half of the slots are dropped jaw; otherwise the
// dropped-jaw slots are turned into Missing.
std::optional<MouthSequence> DroppedJawGate(MouthSequence seq);

// Fills every Missing run of length exactly one that has non-missing
// neighbours on both sides with one of the two neighbour states, chosen by a
// fair coin. Longer runs are left alone.
MouthSequence ImputeSingleGaps(MouthSequence seq, Rng& rng);

// nullopt (discard) if an interior single Closed slot sits between two Open
// slots. Otherwise every interior single Open slot between two Closed slots
// is rewritten to Closed. The discard check runs first.
std::optional<MouthSequence> ApplySingletonRules(MouthSequence seq);

// Longest contiguous range without Missing slots; earliest wins ties.
MouthSequence LongestCleanSpan(const MouthSequence& seq);

// Drops the first and last maximal runs. May return an empty sequence.
MouthSequence TrimFlanks(const MouthSequence& span);

struct CycleStats {
  double mean_duration_frames = 0.0;
  int complete_cycles = 0;
};

// Pairs consecutive runs (0,1), (2,3), ... of a trimmed, gap-free span; a
// trailing unpaired run is ignored. nullopt when no pair is complete.
std::optional<CycleStats> CycleDuration(const MouthSequence& span);

// 60 * fps / cycle_frames. Throws std::domain_error for non-positive input.
double VentilationRate(double cycle_frames, double fps);

enum class OutcomeKind : std::uint8_t {
  kEstimated,
  kNeverClosed,
  kNeverOpened,
  kDroppedJawMajority,
  kDiscardedSingletonClosed,
  kNoCompleteCycle,
};
std::string_view ToString(OutcomeKind kind);
OutcomeKind ParseOutcomeKind(std::string_view name);

struct VentilationEstimate {
  double cycle_duration_frames = 0.0;
  double rate_cpm = 0.0;
  int complete_cycles = 0;
  std::int64_t span_start_frame = 0;
  std::int64_t span_end_frame = 0;

  bool operator==(const VentilationEstimate&) const = default;
};

struct TrackOutcome {
  TrackId track_id = 0;
  OutcomeKind kind = OutcomeKind::kNoCompleteCycle;
  std::optional<VentilationEstimate> estimate;  // set iff kEstimated
  // At least one complete cycle was observable before the singleton discard
  // (always true for kEstimated).
  bool has_complete_cycle = false;

  bool operator==(const TrackOutcome&) const = default;
};

TrackOutcome EstimateTrack(const TrackRecord& track, double fps, Rng& rng);

// Per-track generators are seeded with DeriveSeed(seed, track_id); results
// are ordered by track id.
std::vector<TrackOutcome> EstimateTracks(std::span<const TrackRecord> tracks,
                                         double fps, std::uint64_t seed);

inline constexpr double kHistogramBinWidth = 10.0;
inline constexpr int kHistogramBins = 20;  // [0, 200) cpm

struct PenReport {
  std::string source_id;
  std::int64_t video_length_frames = 0;
  double fps = 30.0;
  std::size_t n_fish = 0;
  std::size_t n_dropped_jaw = 0;
  std::size_t n_never_closed = 0;
  std::size_t n_with_cycle = 0;
  std::size_t n_after_qc = 0;
  std::optional<double> median_vr_cpm;
  std::vector<double> vr_values;  // ordered by track id
  std::vector<std::size_t> histogram = std::vector<std::size_t>(kHistogramBins);
  std::size_t histogram_overflow = 0;  // rates >= 200 cpm
};

PenReport MakePenReport(std::span<const TrackOutcome> outcomes,
                        std::int64_t video_length_frames, double fps,
                        std::string source_id = {});

// Rates of the estimated outcomes, in input order.
std::vector<double> EstimatedRates(std::span<const TrackOutcome> outcomes);

// Line-delimited outcomes:
//   {"track_id":1,"outcome":"estimated","rate_cpm":..,"cycle_frames":..,
//    "n_cycles":..}
// Optional fields are omitted for non-estimated outcomes.
void WriteOutcomes(std::ostream& out, std::span<const TrackOutcome> outcomes);
void WriteOutcomesCsv(std::ostream& out, std::span<const TrackOutcome> outcomes);
// Throws FormatError.
std::vector<TrackOutcome> ReadOutcomes(std::istream& in);

void WritePenReport(std::ostream& out, const PenReport& report);
void WriteHistogramCsv(std::ostream& out, const PenReport& report);

}  // namespace ventrate

#endif  // VENTRATE_VENTILATION_H_
