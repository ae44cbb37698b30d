// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef VENTRATE_TRACK_IO_H_
#define VENTRATE_TRACK_IO_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ventrate/detection.h"

namespace ventrate {

using TrackId = std::int64_t;

// One associated detection.
struct TrackEntry {
  std::int64_t frame_index = 0;
  BBox box;
  MouthState state = MouthState::kOpen;
  double confidence = 0.0;

  bool operator==(const TrackEntry&) const = default;
};

// Immutable history of one track: what downstream stages consume. Entry
// frame indices are strictly increasing.
struct TrackRecord {
  TrackId track_id = 0;
  std::vector<TrackEntry> entries;

  std::int64_t FirstFrame() const { return entries.front().frame_index; }
  std::int64_t LastFrame() const { return entries.back().frame_index; }

  bool operator==(const TrackRecord&) const = default;
};

struct TrackFileSummary {
  std::size_t tracks = 0;
  std::size_t entries = 0;
  std::int64_t frames = 0;
  double fps = 30.0;

  bool operator==(const TrackFileSummary&) const = default;
};

struct TrackFile {
  std::vector<TrackRecord> tracks;
  TrackFileSummary summary;
};

// Line-delimited:
//   {"track_id":1,"entries":[{"frame_index":0,"bbox":[x0,y0,x1,y1],
//                             "state":"open","confidence":0.9}, ...]}
//   ...
//   {"summary":{"tracks":N,"entries":M,"frames":F,"fps":30}}
std::string FormatTrackLine(const TrackRecord& track);
void WriteTracks(std::ostream& out, const std::vector<TrackRecord>& tracks,
                 std::int64_t frames, double fps);
std::string WriteTracks(const std::vector<TrackRecord>& tracks,
                        std::int64_t frames, double fps);

// Throws FormatError. The summary line is required and its counts are
// checked against the records.
TrackFile ReadTracks(std::istream& in);
TrackFile ParseTracks(std::string_view text);

}  // namespace ventrate

#endif  // VENTRATE_TRACK_IO_H_
