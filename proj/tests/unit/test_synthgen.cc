// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "ventrate/pipeline.h"
#include "ventrate/statistics.h"
#include "ventrate/stream_io.h"
#include "ventrate/synthgen.h"

namespace ventrate {
namespace {

PenScenario Noisy(int n_fish, std::uint64_t seed = kDefaultSeed) {
  PenScenario s;
  s.n_fish = n_fish;
  s.seed = seed;
  s.noise.miss_prob = 0.05;
  s.noise.transition_misclass_prob = 0.05;
  s.noise.transition_share = 0.92;
  s.noise.bbox_jitter_px = 2.0;
  s.noise.confidence_alpha = 8.0;
  s.noise.confidence_beta = 2.0;
  s.camera_jitter_px = 1.0;
  return s;
}

TEST(Synthgen, SameSeedSameBytes) {
  const SyntheticPen a = Generate(Noisy(40));
  const SyntheticPen b = Generate(Noisy(40));
  EXPECT_EQ(WriteStream(a.meta, a.frames), WriteStream(b.meta, b.frames));
  std::ostringstream ta, tb;
  WriteTruth(ta, a.truth);
  WriteTruth(tb, b.truth);
  EXPECT_EQ(ta.str(), tb.str());
  const SyntheticPen c = Generate(Noisy(40, 5));
  EXPECT_NE(WriteStream(a.meta, a.frames), WriteStream(c.meta, c.frames));
}

TEST(Synthgen, SingleFishAtSixtyIsExact) {
  PenScenario s;
  s.n_fish = 1;
  s.vr_median = 60.0;
  s.vr_dispersion = 0.0;
  s.split_jitter = false;
  s.track_length_min = 150;
  s.track_length_median = 200;
  const SyntheticPen pen = Generate(NoiseFreeScenario(s));
  ASSERT_EQ(pen.truth.fish.size(), 1u);
  EXPECT_DOUBLE_EQ(pen.truth.fish[0].agent.true_vr, 60.0);
  const PenAnalysis a = AnalyzeStream(pen.frames, pen.meta, {}, 1);
  ASSERT_EQ(a.outcomes.size(), 1u);
  ASSERT_TRUE(a.outcomes[0].estimate.has_value());
  EXPECT_DOUBLE_EQ(a.outcomes[0].estimate->rate_cpm, 60.0);
}

TEST(Synthgen, RunLengthsFollowRateAndOpenFraction) {
  PenScenario s;
  s.n_fish = 30;
  s.split_jitter = true;
  const SyntheticPen pen = Generate(NoiseFreeScenario(s));
  for (const FishTruth& f : pen.truth.fish) {
    const double period = 60.0 * s.fps / f.agent.true_vr;
    std::size_t i = 0;
    std::vector<std::pair<MouthState, int>> runs;
    while (i < f.states.size()) {
      std::size_t j = i;
      while (j < f.states.size() && f.states[j] == f.states[i]) ++j;
      runs.push_back({f.states[i], static_cast<int>(j - i)});
      i = j;
    }
    // Interior open/closed pairs span one period up to rounding and jitter.
    for (std::size_t r = 1; r + 2 < runs.size(); ++r) {
      if (runs[r].first != MouthState::kOpen) continue;
      EXPECT_NEAR(runs[r].second + runs[r + 1].second, period, 1.0 + 1e-9);
      EXPECT_NEAR(runs[r].second, s.open_fraction * period, 2.0);
      EXPECT_GE(runs[r + 1].second, 1);
    }
  }
}

TEST(Synthgen, BoxesInsideFrame) {
  const SyntheticPen pen = Generate(Noisy(100));
  for (const FishTruth& f : pen.truth.fish) {
    for (const BBox& b : f.boxes) {
      EXPECT_GE(b.x_min, 0.0);
      EXPECT_GE(b.y_min, 0.0);
      EXPECT_LE(b.x_max, 1280.0);
      EXPECT_LE(b.y_max, 960.0);
    }
  }
}

TEST(Synthgen, TrackLengthsWithinRange) {
  const SyntheticPen pen = Generate(NoiseFreeScenario(Noisy(500)));
  std::vector<double> lengths;
  for (const FishTruth& f : pen.truth.fish) {
    EXPECT_GE(f.states.size(), 18u);
    EXPECT_LE(f.states.size(), 226u);
    lengths.push_back(static_cast<double>(f.states.size()));
  }
  EXPECT_NEAR(*Median(lengths), 69.0, 6.0);
}

TEST(Synthgen, MedianRateConverges) {
  PenScenario s = Noisy(600);
  s.vr_median = 88.5;
  const SyntheticPen pen = Generate(s);
  std::vector<double> rates;
  for (const FishTruth& f : pen.truth.fish) rates.push_back(f.agent.true_vr);
  EXPECT_NEAR(*Median(rates), 88.5, 2.0);
  // Log-normal interquartile range at the default dispersion.
  const double z = 0.6745 * s.vr_dispersion;
  EXPECT_NEAR(Quantile(rates, 0.75) - Quantile(rates, 0.25),
              88.5 * (std::exp(z) - std::exp(-z)), 3.0);
}

TEST(Synthgen, FlipShareNearTarget) {
  const SyntheticPen pen = Generate(Noisy(800));
  EXPECT_GT(pen.truth.flips_at_transition + pen.truth.flips_interior, 200u);
  EXPECT_NEAR(pen.truth.TransitionFlipShare(), 0.92, 0.05);
}

TEST(Synthgen, DroppedJawFraction) {
  PenScenario s = Noisy(1000);
  s.dropped_jaw_fraction = 0.01;
  s.never_close_fraction = 0.004;
  const SyntheticPen pen = Generate(s);
  const GroundTruthSet gt = TruthToGroundTruthSet(pen.truth);
  std::vector<TrackRecord> as_tracks;
  for (const auto& t : gt.tracks) {
    TrackRecord r{t.fish_id, {}};
    for (const auto& e : t.entries) r.entries.push_back({e.frame_index, e.box, e.state, 1.0});
    as_tracks.push_back(std::move(r));
  }
  const auto outcomes = EstimateTracks(as_tracks, 30.0, 1);
  const PenReport report = MakePenReport(outcomes, pen.truth.video_length, 30.0);
  EXPECT_NEAR(static_cast<double>(report.n_dropped_jaw) / 1000.0, 0.01, 0.007);
  EXPECT_GE(report.n_never_closed, 1u);
}

TEST(Synthgen, TruthConversionAndPerfectDetector) {
  const SyntheticPen empty = Generate([] {
    PenScenario s;
    s.n_fish = 0;
    return s;
  }());
  const GroundTruthSet none = TruthToGroundTruthSet(empty.truth);
  EXPECT_TRUE(none.boxes.empty());
  EXPECT_TRUE(none.tracks.empty());

  const SyntheticPen pen = Generate(NoiseFreeScenario(Noisy(40)));
  const GroundTruthSet gt = TruthToGroundTruthSet(pen.truth);
  std::size_t total = 0;
  for (const auto& f : pen.truth.fish) total += f.states.size();
  EXPECT_EQ(gt.boxes.size(), total);
  std::vector<ScoredBox> preds;
  for (const auto& f : pen.frames) {
    for (const auto& d : f.detections) preds.push_back({f.frame_index, d.box, d.state, d.confidence});
  }
  const double t50[] = {0.5};
  const MouthState classes[] = {MouthState::kOpen, MouthState::kClosed};
  EXPECT_DOUBLE_EQ(MeanAveragePrecision(preds, gt.boxes, classes, t50), 1.0);
}

TEST(Synthgen, TruthFileRoundTrip) {
  const SyntheticPen pen = Generate(Noisy(25));
  std::stringstream ss;
  WriteTruth(ss, pen.truth);
  const std::string text = ss.str();
  const SyntheticTruth back = ReadTruth(ss);
  ASSERT_EQ(back.fish.size(), pen.truth.fish.size());
  EXPECT_EQ(back.fish[3].states, pen.truth.fish[3].states);
  std::ostringstream again;
  WriteTruth(again, back);
  EXPECT_EQ(again.str(), text);
}

TEST(Synthgen, ScenarioErrors) {
  PenScenario s;
  s.head_width_min = 2000;
  s.head_width_max = 2000;
  EXPECT_THROW(Generate(s), ScenarioError);
  s = PenScenario{};
  s.open_fraction = 1.0;
  EXPECT_THROW(Generate(s), ScenarioError);
  s = PenScenario{};
  s.noise.miss_prob = -0.1;
  EXPECT_THROW(Generate(s), ScenarioError);
  s = PenScenario{};
  s.fps = 0;
  EXPECT_THROW(Generate(s), ScenarioError);
}

TEST(Synthgen, MaxFramesTruncates) {
  PenScenario s = Noisy(5000);
  s.max_frames = 300;
  const SyntheticPen pen = Generate(s);
  EXPECT_EQ(pen.frames.size(), 300u);
  for (const auto& f : pen.truth.fish) EXPECT_LT(f.last_frame(), 300);
}

TEST(Synthgen, GapMaskRoundTripsThroughSequence) {
  PenScenario s = NoiseFreeScenario(Noisy(30));
  s.noise.miss_prob = 0.2;
  s.noise.confidence_alpha = 0.0;
  const SyntheticPen pen = Generate(s);
  const auto tracks = TrackStream(pen.frames);
  const auto owners = MajorityOverlapOwners(TruthToGroundTruthSet(pen.truth).tracks, tracks);
  std::size_t checked = 0;
  for (std::size_t d = 0; d < tracks.size(); ++d) {
    const MouthSequence seq = BuildSequence(tracks[d]);
    std::set<std::int64_t> seen;
    for (const auto& e : tracks[d].entries) seen.insert(e.frame_index);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const bool missing = seq.slots[i] == MouthSlot::kMissing;
      EXPECT_EQ(missing, !seen.count(seq.start_frame + static_cast<std::int64_t>(i)));
    }
    checked += owners[d].gt_index.has_value();
  }
  EXPECT_GT(checked, 20u);
}

TEST(Pipeline, NoiseFreeRecoversAnnotatedRates) {
  PenScenario s = NoiseFreeScenario(Noisy(50));
  const SyntheticPen pen = Generate(s);
  const PenAnalysis a = AnalyzeStream(pen.frames, pen.meta, {}, 3);
  const auto pairs = PairRates(pen.truth, a.tracks, a.outcomes);
  EXPECT_GT(pairs.size(), 40u);
  for (const auto& p : pairs) EXPECT_DOUBLE_EQ(p.truth, p.estimate);
}

}  // namespace
}  // namespace ventrate
