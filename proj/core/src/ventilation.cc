// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ventrate/ventilation.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "ventrate/statistics.h"
#include "ventrate/stream_io.h"

namespace ventrate {

using nlohmann::json;

MouthSlot ToSlot(MouthState state) {
  switch (state) {
    case MouthState::kOpen:
      return MouthSlot::kOpen;
    case MouthState::kClosed:
      return MouthSlot::kClosed;
    case MouthState::kDroppedJaw:
      return MouthSlot::kDroppedJaw;
  }
  return MouthSlot::kMissing;
}

std::vector<SlotRun> Runs(std::span<const MouthSlot> slots) {
  std::vector<SlotRun> runs;
  std::size_t i = 0;
  while (i < slots.size()) {
    std::size_t j = i + 1;
    while (j < slots.size() && slots[j] == slots[i]) ++j;
    runs.push_back({slots[i], i, j - i});
    i = j;
  }
  return runs;
}

MouthSequence BuildSequence(const TrackRecord& track) {
  if (track.entries.empty()) {
    throw std::invalid_argument("cannot build a sequence from an empty track");
  }
  MouthSequence seq;
  seq.track_id = track.track_id;
  seq.start_frame = track.FirstFrame();
  seq.slots.assign(
      static_cast<std::size_t>(track.LastFrame() - track.FirstFrame() + 1),
      MouthSlot::kMissing);
  for (const TrackEntry& e : track.entries) {
    seq.slots[static_cast<std::size_t>(e.frame_index - seq.start_frame)] =
        ToSlot(e.state);
  }
  return seq;
}

std::optional<MouthSequence> DroppedJawGate(MouthSequence seq) {
  const auto dropped = static_cast<std::size_t>(
      std::count(seq.slots.begin(), seq.slots.end(), MouthSlot::kDroppedJaw));
  if (dropped > seq.size() / 2) return std::nullopt;
  std::replace(seq.slots.begin(), seq.slots.end(), MouthSlot::kDroppedJaw,
               MouthSlot::kMissing);
  return seq;
}

MouthSequence ImputeSingleGaps(MouthSequence seq, Rng& rng) {
  auto& s = seq.slots;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] != MouthSlot::kMissing) continue;
    if (s[i - 1] == MouthSlot::kMissing || s[i + 1] == MouthSlot::kMissing) {
      continue;
    }
    s[i] = CoinFlip(rng) ? s[i - 1] : s[i + 1];
  }
  return seq;
}

namespace {

// Singleton run with `outer` state on both sides.
bool IsFlankedSingleton(std::span<const MouthSlot> s, const SlotRun& run,
                        MouthSlot outer) {
  return run.length == 1 && run.begin > 0 && run.begin + 1 < s.size() &&
         s[run.begin - 1] == outer && s[run.begin + 1] == outer;
}

}  // namespace

std::optional<MouthSequence> ApplySingletonRules(MouthSequence seq) {
  const std::vector<SlotRun> runs = Runs(seq.slots);
  for (const SlotRun& run : runs) {
    if (run.slot == MouthSlot::kClosed &&
        IsFlankedSingleton(seq.slots, run, MouthSlot::kOpen)) {
      return std::nullopt;
    }
  }
  for (const SlotRun& run : runs) {
    if (run.slot == MouthSlot::kOpen &&
        IsFlankedSingleton(seq.slots, run, MouthSlot::kClosed)) {
      seq.slots[run.begin] = MouthSlot::kClosed;
    }
  }
  return seq;
}

MouthSequence LongestCleanSpan(const MouthSequence& seq) {
  std::size_t best_begin = 0, best_len = 0;
  std::size_t i = 0;
  while (i < seq.size()) {
    if (seq.slots[i] == MouthSlot::kMissing) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < seq.size() && seq.slots[j] != MouthSlot::kMissing) ++j;
    if (j - i > best_len) {
      best_begin = i;
      best_len = j - i;
    }
    i = j;
  }
  MouthSequence span;
  span.track_id = seq.track_id;
  span.start_frame = seq.start_frame + static_cast<std::int64_t>(best_begin);
  span.slots.assign(seq.slots.begin() + best_begin,
                    seq.slots.begin() + best_begin + best_len);
  return span;
}

MouthSequence TrimFlanks(const MouthSequence& span) {
  MouthSequence out;
  out.track_id = span.track_id;
  out.start_frame = span.start_frame;
  const std::vector<SlotRun> runs = Runs(span.slots);
  if (runs.size() <= 2) return out;
  const std::size_t begin = runs.front().length;
  const std::size_t end = span.size() - runs.back().length;
  out.start_frame = span.start_frame + static_cast<std::int64_t>(begin);
  out.slots.assign(span.slots.begin() + begin, span.slots.begin() + end);
  return out;
}

std::optional<CycleStats> CycleDuration(const MouthSequence& span) {
  const std::vector<SlotRun> runs = Runs(span.slots);
  const std::size_t pairs = runs.size() / 2;
  if (pairs == 0) return std::nullopt;
  std::size_t total = 0;
  for (std::size_t k = 0; k < pairs; ++k) {
    total += runs[2 * k].length + runs[2 * k + 1].length;
  }
  return CycleStats{static_cast<double>(total) / static_cast<double>(pairs),
                    static_cast<int>(pairs)};
}

double VentilationRate(double cycle_frames, double fps) {
  if (!(cycle_frames > 0.0) || !(fps > 0.0)) {
    throw std::domain_error(
        "ventilation rate needs positive cycle duration and fps");
  }
  return 60.0 * fps / cycle_frames;
}

std::string_view ToString(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::kEstimated:
      return "estimated";
    case OutcomeKind::kNeverClosed:
      return "never_closed";
    case OutcomeKind::kNeverOpened:
      return "never_opened";
    case OutcomeKind::kDroppedJawMajority:
      return "dropped_jaw_majority";
    case OutcomeKind::kDiscardedSingletonClosed:
      return "discarded_singleton_closed";
    case OutcomeKind::kNoCompleteCycle:
      return "no_complete_cycle";
  }
  return "no_complete_cycle";
}

OutcomeKind ParseOutcomeKind(std::string_view name) {
  for (OutcomeKind k :
       {OutcomeKind::kEstimated, OutcomeKind::kNeverClosed,
        OutcomeKind::kNeverOpened, OutcomeKind::kDroppedJawMajority,
        OutcomeKind::kDiscardedSingletonClosed, OutcomeKind::kNoCompleteCycle}) {
    if (ToString(k) == name) return k;
  }
  throw std::invalid_argument("unknown outcome '" + std::string(name) + "'");
}

namespace {

std::optional<CycleStats> CyclesOf(const MouthSequence& seq) {
  return CycleDuration(TrimFlanks(LongestCleanSpan(seq)));
}

// Singleton conversion without the discard check; used only to tell whether
// a discarded track would otherwise have shown a complete cycle.
MouthSequence ConvertOpenSingletons(MouthSequence seq) {
  for (const SlotRun& run : Runs(seq.slots)) {
    if (run.slot == MouthSlot::kOpen &&
        IsFlankedSingleton(seq.slots, run, MouthSlot::kClosed)) {
      seq.slots[run.begin] = MouthSlot::kClosed;
    }
  }
  return seq;
}

}  // namespace

TrackOutcome EstimateTrack(const TrackRecord& track, double fps, Rng& rng) {
  TrackOutcome outcome;
  outcome.track_id = track.track_id;

  std::optional<MouthSequence> seq = DroppedJawGate(BuildSequence(track));
  if (!seq) {
    outcome.kind = OutcomeKind::kDroppedJawMajority;
    return outcome;
  }
  const bool any_open = std::find(seq->slots.begin(), seq->slots.end(),
                                  MouthSlot::kOpen) != seq->slots.end();
  const bool any_closed = std::find(seq->slots.begin(), seq->slots.end(),
                                    MouthSlot::kClosed) != seq->slots.end();
  if (!any_closed) {
    outcome.kind = OutcomeKind::kNeverClosed;
    return outcome;
  }
  if (!any_open) {
    outcome.kind = OutcomeKind::kNeverOpened;
    return outcome;
  }

  MouthSequence imputed = ImputeSingleGaps(std::move(*seq), rng);
  std::optional<MouthSequence> cleaned = ApplySingletonRules(imputed);
  if (!cleaned) {
    outcome.kind = OutcomeKind::kDiscardedSingletonClosed;
    outcome.has_complete_cycle =
        CyclesOf(ConvertOpenSingletons(std::move(imputed))).has_value();
    return outcome;
  }

  const MouthSequence span = TrimFlanks(LongestCleanSpan(*cleaned));
  const std::optional<CycleStats> cycles = CycleDuration(span);
  if (!cycles) {
    outcome.kind = OutcomeKind::kNoCompleteCycle;
    return outcome;
  }
  outcome.kind = OutcomeKind::kEstimated;
  outcome.has_complete_cycle = true;
  outcome.estimate = VentilationEstimate{
      cycles->mean_duration_frames,
      VentilationRate(cycles->mean_duration_frames, fps),
      cycles->complete_cycles, span.start_frame, span.end_frame()};
  return outcome;
}

std::vector<TrackOutcome> EstimateTracks(std::span<const TrackRecord> tracks,
                                         double fps, std::uint64_t seed) {
  std::vector<TrackOutcome> outcomes;
  outcomes.reserve(tracks.size());
  for (const TrackRecord& t : tracks) {
    Rng rng(DeriveSeed(seed, static_cast<std::uint64_t>(t.track_id)));
    outcomes.push_back(EstimateTrack(t, fps, rng));
  }
  std::stable_sort(outcomes.begin(), outcomes.end(),
                   [](const TrackOutcome& a, const TrackOutcome& b) {
                     return a.track_id < b.track_id;
                   });
  return outcomes;
}

std::vector<double> EstimatedRates(std::span<const TrackOutcome> outcomes) {
  std::vector<double> rates;
  for (const TrackOutcome& o : outcomes) {
    if (o.estimate) rates.push_back(o.estimate->rate_cpm);
  }
  return rates;
}

PenReport MakePenReport(std::span<const TrackOutcome> outcomes,
                        std::int64_t video_length_frames, double fps,
                        std::string source_id) {
  PenReport report;
  report.source_id = std::move(source_id);
  report.video_length_frames = video_length_frames;
  report.fps = fps;
  report.n_fish = outcomes.size();
  for (const TrackOutcome& o : outcomes) {
    if (o.kind == OutcomeKind::kDroppedJawMajority) ++report.n_dropped_jaw;
    if (o.kind == OutcomeKind::kNeverClosed) ++report.n_never_closed;
    if (o.has_complete_cycle) ++report.n_with_cycle;
  }
  report.vr_values = EstimatedRates(outcomes);
  report.n_after_qc = report.vr_values.size();
  report.median_vr_cpm = Median(report.vr_values);
  for (double v : report.vr_values) {
    const auto bin = static_cast<std::size_t>(std::floor(v / kHistogramBinWidth));
    if (bin < report.histogram.size()) {
      ++report.histogram[bin];
    } else {
      ++report.histogram_overflow;
    }
  }
  return report;
}

void WriteOutcomes(std::ostream& out, std::span<const TrackOutcome> outcomes) {
  for (const TrackOutcome& o : outcomes) {
    std::string line = "{\"track_id\":" + std::to_string(o.track_id) +
                       ",\"outcome\":\"" + std::string(ToString(o.kind)) + "\"";
    if (o.estimate) {
      line += ",\"rate_cpm\":";
      AppendNumber(line, o.estimate->rate_cpm);
      line += ",\"cycle_frames\":";
      AppendNumber(line, o.estimate->cycle_duration_frames);
      line += ",\"n_cycles\":" + std::to_string(o.estimate->complete_cycles);
      line += ",\"span\":[" + std::to_string(o.estimate->span_start_frame) +
              "," + std::to_string(o.estimate->span_end_frame) + "]";
    } else if (o.kind == OutcomeKind::kDiscardedSingletonClosed) {
      line += o.has_complete_cycle ? ",\"with_cycle\":true"
                                   : ",\"with_cycle\":false";
    }
    line += "}";
    out << line << '\n';
  }
}

void WriteOutcomesCsv(std::ostream& out,
                      std::span<const TrackOutcome> outcomes) {
  out << "track_id,outcome,rate_cpm,cycle_frames,n_cycles\n";
  for (const TrackOutcome& o : outcomes) {
    out << o.track_id << ',' << ToString(o.kind) << ',';
    if (o.estimate) {
      out << FormatNumber(o.estimate->rate_cpm) << ','
          << FormatNumber(o.estimate->cycle_duration_frames) << ','
          << o.estimate->complete_cycles;
    } else {
      out << ",,";
    }
    out << '\n';
  }
}

std::vector<TrackOutcome> ReadOutcomes(std::istream& in) {
  std::vector<TrackOutcome> outcomes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json doc = json::parse(line);
      TrackOutcome o;
      o.track_id = doc.at("track_id").get<TrackId>();
      o.kind = ParseOutcomeKind(doc.at("outcome").get<std::string>());
      if (o.kind == OutcomeKind::kEstimated) {
        VentilationEstimate e;
        e.rate_cpm = doc.at("rate_cpm").get<double>();
        e.cycle_duration_frames = doc.at("cycle_frames").get<double>();
        e.complete_cycles = doc.at("n_cycles").get<int>();
        if (auto s = doc.find("span"); s != doc.end()) {
          e.span_start_frame = s->at(0).get<std::int64_t>();
          e.span_end_frame = s->at(1).get<std::int64_t>();
        }
        o.estimate = e;
        o.has_complete_cycle = true;
      } else if (auto w = doc.find("with_cycle"); w != doc.end()) {
        o.has_complete_cycle = w->get<bool>();
      }
      outcomes.push_back(o);
    } catch (const json::exception& e) {
      throw FormatError(line_no, std::string("bad outcome record: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw FormatError(line_no, e.what());
    }
  }
  return outcomes;
}

void WritePenReport(std::ostream& out, const PenReport& report) {
  json doc = json::object();
  doc["source_id"] = report.source_id;
  doc["video_length_frames"] = report.video_length_frames;
  doc["fps"] = report.fps;
  doc["all_fish"] = report.n_fish;
  doc["fish_with_dropped_jaws"] = report.n_dropped_jaw;
  doc["fish_never_closed"] = report.n_never_closed;
  doc["fish_with_complete_cycle"] = report.n_with_cycle;
  doc["after_quality_control"] = report.n_after_qc;
  doc["median_vr_cpm"] = report.median_vr_cpm
                             ? json(std::stod(FormatNumber(*report.median_vr_cpm)))
                             : json(nullptr);
  json bins = json::array();
  for (int b = 0; b < kHistogramBins; ++b) {
    bins.push_back({{"low", b * kHistogramBinWidth},
                    {"high", (b + 1) * kHistogramBinWidth},
                    {"count", report.histogram[b]}});
  }
  doc["histogram"] = std::move(bins);
  doc["histogram_overflow"] = report.histogram_overflow;
  out << doc.dump(2) << '\n';
}

void WriteHistogramCsv(std::ostream& out, const PenReport& report) {
  out << "bin_low,bin_high,count\n";
  for (int b = 0; b < kHistogramBins; ++b) {
    out << b * static_cast<int>(kHistogramBinWidth) << ','
        << (b + 1) * static_cast<int>(kHistogramBinWidth) << ','
        << report.histogram[b] << '\n';
  }
  out << "200,inf," << report.histogram_overflow << '\n';
}

}  // namespace ventrate
