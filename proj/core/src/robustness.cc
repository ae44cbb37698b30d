// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ventrate/robustness.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ventrate/statistics.h"
#include "ventrate/stream_io.h"
#include "ventrate/ventilation.h"

namespace ventrate {

std::string_view ToString(CorruptionKind kind) {
  switch (kind) {
    case CorruptionKind::kMissedSingle:
      return "missed_single";
    case CorruptionKind::kMissedAdjacentPair:
      return "missed_adjacent_pair";
    case CorruptionKind::kIdentitySwitch:
      return "identity_switch";
  }
  return "missed_single";
}

CorruptionKind ParseCorruptionKind(std::string_view name) {
  for (CorruptionKind k : {CorruptionKind::kMissedSingle,
                           CorruptionKind::kMissedAdjacentPair,
                           CorruptionKind::kIdentitySwitch}) {
    if (ToString(k) == name) return k;
  }
  throw std::invalid_argument("unknown corruption kind '" + std::string(name) +
                              "'");
}

void CorruptionSpec::Validate() const {
  if (count_min < 1 || count_max < count_min) {
    throw std::invalid_argument("corruption: need 1 <= count_min <= count_max");
  }
  for (double inc : incidences) {
    if (!(inc >= 0.0 && inc <= 1.0)) {
      throw std::invalid_argument("corruption: incidence must lie in [0, 1]");
    }
  }
  if (replicates < 1) throw std::invalid_argument("corruption: replicates >= 1");
}

namespace {

// k distinct values from [0, n), sorted ascending.
std::vector<std::int64_t> SampleSorted(std::int64_t n, int k, Rng& rng) {
  std::vector<std::int64_t> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    const auto j = UniformInt(rng, i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

TrackRecord WithoutPositions(const TrackRecord& track,
                             const std::vector<std::int64_t>& removed) {
  TrackRecord out{track.track_id, {}};
  out.entries.reserve(track.entries.size() - removed.size());
  std::size_t r = 0;
  for (std::size_t i = 0; i < track.entries.size(); ++i) {
    if (r < removed.size() && static_cast<std::int64_t>(i) == removed[r]) {
      ++r;
      continue;
    }
    out.entries.push_back(track.entries[i]);
  }
  return out;
}

}  // namespace

std::optional<TrackRecord> CorruptMissedSingle(const TrackRecord& track, int k,
                                               Rng& rng) {
  if (k < 1) throw std::invalid_argument("corruption count must be >= 1");
  const auto n = static_cast<std::int64_t>(track.entries.size());
  const std::int64_t interior = n - 2;
  if (n <= k + 2 || interior - k + 1 < k) return std::nullopt;
  // Non-adjacent k-subsets of the interior map one-to-one onto plain
  // k-subsets of [0, interior - k + 1) via position = 1 + t_i + i.
  std::vector<std::int64_t> t = SampleSorted(interior - k + 1, k, rng);
  for (int i = 0; i < k; ++i) t[static_cast<std::size_t>(i)] += 1 + i;
  return WithoutPositions(track, t);
}

std::optional<TrackRecord> CorruptMissedAdjacent(const TrackRecord& track,
                                                 int k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("corruption count must be >= 1");
  const auto n = static_cast<std::int64_t>(track.entries.size());
  const std::int64_t interior = n - 2;
  const std::int64_t free_slots = interior - 2 * static_cast<std::int64_t>(k) + 1;
  if (free_slots < k) return std::nullopt;
  // Block starts s_i = 1 + t_i + 2i keep at least one survivor between
  // consecutive blocks.
  const std::vector<std::int64_t> t = SampleSorted(free_slots, k, rng);
  std::vector<std::int64_t> removed;
  for (int i = 0; i < k; ++i) {
    const std::int64_t start = 1 + t[static_cast<std::size_t>(i)] + 2 * i;
    removed.push_back(start);
    removed.push_back(start + 1);
  }
  return WithoutPositions(track, removed);
}

std::optional<std::vector<TrackRecord>> CorruptIdentitySwitch(
    const TrackRecord& track, int k, Rng& rng, TrackId& next_id) {
  if (k < 1) throw std::invalid_argument("corruption count must be >= 1");
  const auto n = static_cast<std::int64_t>(track.entries.size());
  if (k >= n - 2) return std::nullopt;
  // Cut c splits before entry c, c in [1, n - 1].
  std::vector<std::int64_t> cuts = SampleSorted(n - 1, k, rng);
  for (auto& c : cuts) c += 1;
  cuts.push_back(n);
  std::vector<TrackRecord> fragments;
  std::int64_t begin = 0;
  for (std::int64_t end : cuts) {
    TrackRecord frag{next_id++, {}};
    frag.entries.assign(track.entries.begin() + begin, track.entries.begin() + end);
    fragments.push_back(std::move(frag));
    begin = end;
  }
  return fragments;
}

namespace {

std::uint64_t ReplicateSeed(const CorruptionSpec& spec, std::string_view pen,
                            std::size_t incidence_index, int replicate) {
  std::uint64_t s = DeriveSeed(spec.seed, "corruption");
  s = DeriveSeed(s, ToString(spec.kind));
  s = DeriveSeed(s, pen);
  s = DeriveSeed(s, static_cast<std::uint64_t>(incidence_index));
  return DeriveSeed(s, static_cast<std::uint64_t>(replicate));
}

struct Corrupted {
  std::vector<TrackRecord> tracks;
  std::size_t skipped = 0;
};

Corrupted CorruptPen(std::span<const TrackRecord> tracks,
                     const CorruptionSpec& spec, double incidence, Rng& rng) {
  Corrupted out;
  const auto n = static_cast<std::int64_t>(tracks.size());
  const auto n_corrupt = static_cast<int>(std::llround(incidence * static_cast<double>(n)));
  std::vector<char> chosen(tracks.size(), 0);
  for (std::int64_t idx : SampleSorted(n, n_corrupt, rng)) {
    chosen[static_cast<std::size_t>(idx)] = 1;
  }
  TrackId next_id = 1;
  for (const TrackRecord& t : tracks) next_id = std::max(next_id, t.track_id + 1);

  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (!chosen[i]) {
      out.tracks.push_back(tracks[i]);
      continue;
    }
    const int k = static_cast<int>(UniformInt(rng, spec.count_min, spec.count_max));
    switch (spec.kind) {
      case CorruptionKind::kMissedSingle:
      case CorruptionKind::kMissedAdjacentPair: {
        auto c = spec.kind == CorruptionKind::kMissedSingle
                     ? CorruptMissedSingle(tracks[i], k, rng)
                     : CorruptMissedAdjacent(tracks[i], k, rng);
        if (c) {
          out.tracks.push_back(std::move(*c));
        } else {
          ++out.skipped;
          out.tracks.push_back(tracks[i]);
        }
        break;
      }
      case CorruptionKind::kIdentitySwitch: {
        auto frags = CorruptIdentitySwitch(tracks[i], k, rng, next_id);
        if (frags) {
          for (auto& f : *frags) out.tracks.push_back(std::move(f));
        } else {
          ++out.skipped;
          out.tracks.push_back(tracks[i]);
        }
        break;
      }
    }
  }
  return out;
}

double MedianOrNan(std::span<const double> values) {
  return Median(values).value_or(std::numeric_limits<double>::quiet_NaN());
}

}  // namespace

RobustnessResult RunRobustness(
    std::span<const PenTracks> pens, const CorruptionSpec& spec,
    std::uint64_t estimation_seed,
    std::span<const std::pair<std::string, std::string>> comparisons) {
  spec.Validate();
  RobustnessResult result;

  std::vector<double> baseline(pens.size());
  for (std::size_t p = 0; p < pens.size(); ++p) {
    const auto outcomes = EstimateTracks(pens[p].tracks, pens[p].fps, estimation_seed);
    baseline[p] = MedianOrNan(EstimatedRates(outcomes));
  }
  auto pen_index = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t p = 0; p < pens.size(); ++p) {
      if (pens[p].name == name) return p;
    }
    return std::nullopt;
  };
  for (const auto& [a, b] : comparisons) {
    if (!pen_index(a) || !pen_index(b)) {
      throw std::invalid_argument("comparison names unknown pen '" +
                                  (pen_index(a) ? b : a) + "'");
    }
  }

  for (std::size_t ii = 0; ii < spec.incidences.size(); ++ii) {
    const double incidence = spec.incidences[ii];
    const std::size_t group_begin = result.rows.size();
    for (int rep = 0; rep < spec.replicates; ++rep) {
      std::vector<std::vector<double>> rates(pens.size());
      const std::size_t rep_begin = result.rows.size();
      for (std::size_t p = 0; p < pens.size(); ++p) {
        Rng rng(ReplicateSeed(spec, pens[p].name, ii, rep));
        const Corrupted c = CorruptPen(pens[p].tracks, spec, incidence, rng);
        if (c.skipped > 0) {
          std::clog << "ventrate: " << c.skipped << " track(s) of pen '"
                    << pens[p].name << "' too short for "
                    << ToString(spec.kind) << "; left uncorrupted\n";
        }
        rates[p] = EstimatedRates(EstimateTracks(c.tracks, pens[p].fps, estimation_seed));
        RobustnessRow row;
        row.pen = pens[p].name;
        row.kind = spec.kind;
        row.incidence = incidence;
        row.replicate = rep;
        row.baseline_median_vr = baseline[p];
        row.median_vr = MedianOrNan(rates[p]);
        row.delta_mvr = std::abs(row.median_vr - baseline[p]);
        row.skipped_tracks = c.skipped;
        result.rows.push_back(row);
      }
      for (const auto& [a, b] : comparisons) {
        const std::size_t pa = *pen_index(a);
        const std::size_t pb = *pen_index(b);
        double p_value = 1.0;
        if (!rates[pa].empty() && !rates[pb].empty()) {
          p_value = MannWhitneyU(rates[pa], rates[pb]).p_value;
        }
        result.comparisons.push_back({a, b, incidence, rep, p_value});
        for (std::size_t pen : {pa, pb}) {
          auto& slot = result.rows[rep_begin + pen].mann_whitney_p;
          slot = std::max(slot.value_or(0.0), p_value);
        }
      }
    }
    // 95% interval of the mean delta over replicates, per pen.
    for (std::size_t p = 0; p < pens.size(); ++p) {
      std::vector<double> deltas;
      for (std::size_t r = group_begin + p; r < result.rows.size(); r += pens.size()) {
        deltas.push_back(result.rows[r].delta_mvr);
      }
      const double mean = Mean(deltas);
      double half = 0.0;
      if (deltas.size() > 1) {
        double ss = 0.0;
        for (double d : deltas) ss += (d - mean) * (d - mean);
        const double sd = std::sqrt(ss / static_cast<double>(deltas.size() - 1));
        half = 1.96 * sd / std::sqrt(static_cast<double>(deltas.size()));
      }
      for (std::size_t r = group_begin + p; r < result.rows.size(); r += pens.size()) {
        result.rows[r].ci_low = mean - half;
        result.rows[r].ci_high = mean + half;
      }
    }
  }
  return result;
}

void WriteRobustnessCsv(std::ostream& out, const RobustnessResult& result) {
  out << "pen,kind,incidence,replicate,median_vr,delta_mvr,ci_low,ci_high,"
         "mann_whitney_p\n";
  auto num = [](double v) {
    return std::isfinite(v) ? FormatNumber(v) : std::string("nan");
  };
  for (const RobustnessRow& r : result.rows) {
    out << r.pen << ',' << ToString(r.kind) << ',' << num(r.incidence) << ','
        << r.replicate << ',' << num(r.median_vr) << ',' << num(r.delta_mvr)
        << ',' << num(r.ci_low) << ',' << num(r.ci_high) << ',';
    if (r.mann_whitney_p) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.6g", *r.mann_whitney_p);
      out << buf;
    }
    out << '\n';
  }
}

std::pair<std::vector<TrackRecord>, double> DownsampleTracks(
    std::span<const TrackRecord> tracks, int factor, double fps) {
  if (factor < 2) throw std::invalid_argument("downsampling factor must be >= 2");
  std::vector<TrackRecord> out;
  for (const TrackRecord& t : tracks) {
    TrackRecord kept{t.track_id, {}};
    for (const TrackEntry& e : t.entries) {
      if (e.frame_index % factor != 0) continue;
      TrackEntry copy = e;
      copy.frame_index = e.frame_index / factor;
      kept.entries.push_back(copy);
    }
    if (!kept.entries.empty()) out.push_back(std::move(kept));
  }
  return {std::move(out), fps / factor};
}

}  // namespace ventrate
