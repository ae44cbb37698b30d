// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "ventrate/assignment.h"
#include "ventrate/pipeline.h"
#include "ventrate/seeds.h"
#include "ventrate/synthgen.h"
#include "ventrate/tracker.h"
#include "ventrate/ventilation.h"

namespace ventrate {
namespace {

// Crowded noisy stream, generated once per process.
const SyntheticPen& CrowdedPen() {
  static const SyntheticPen pen = [] {
    PenScenario s;
    s.n_fish = 3000;
    s.crowding = true;
    s.cell_width = 240.0;
    s.lane_height = 64.0;
    s.max_frames = 1000;
    s.noise.miss_prob = 0.05;
    s.noise.transition_misclass_prob = 0.05;
    s.noise.transition_share = 0.92;
    s.noise.bbox_jitter_px = 2.0;
    s.noise.confidence_alpha = 8.0;
    s.noise.confidence_beta = 2.0;
    s.camera_jitter_px = 1.0;
    return Generate(s);
  }();
  return pen;
}

void BM_TrackerStep(benchmark::State& state) {
  const auto& frames = CrowdedPen().frames;
  for (auto _ : state) {
    Tracker tracker;
    for (const FrameRecord& f : frames) benchmark::DoNotOptimize(tracker.Step(f));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(frames.size()));
  state.SetLabel("items = frames");
}
BENCHMARK(BM_TrackerStep)->Unit(benchmark::kMillisecond);

void BM_EstimateTracks(benchmark::State& state) {
  const auto tracks = TrackStream(CrowdedPen().frames);
  for (auto _ : state) benchmark::DoNotOptimize(EstimateTracks(tracks, 30.0, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(tracks.size()));
  state.SetLabel("items = tracks");
}
BENCHMARK(BM_EstimateTracks)->Unit(benchmark::kMillisecond);

void BM_SolveAssignment(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  Rng rng(7);
  Eigen::MatrixXd cost(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) cost(r, c) = UniformUnit(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(SolveAssignment(cost, 0.3));
}
BENCHMARK(BM_SolveAssignment)->RangeMultiplier(2)->Range(8, 128);

}  // namespace
}  // namespace ventrate

BENCHMARK_MAIN();
