// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef VENTRATE_TESTS_TEST_UTIL_H_
#define VENTRATE_TESTS_TEST_UTIL_H_

#include <string>
#include <vector>

#include "ventrate/geometry.h"
#include "ventrate/seeds.h"
#include "ventrate/track_io.h"
#include "ventrate/ventilation.h"

namespace ventrate::testing_util {

inline BBox RandomBox(Rng& rng, double extent) {
  const double x = UniformUnit(rng) * extent;
  const double y = UniformUnit(rng) * extent;
  return BBox::FromCorners(x, y, x + 1.0 + UniformUnit(rng) * extent * 0.5,
                           y + 1.0 + UniformUnit(rng) * extent * 0.5);
}

// "OOC.D" style: O open, C closed, D dropped jaw, '.' missing.
inline MouthSequence Seq(const std::string& s, std::int64_t start = 0) {
  MouthSequence seq;
  seq.track_id = 1;
  seq.start_frame = start;
  for (char c : s) {
    switch (c) {
      case 'O': seq.slots.push_back(MouthSlot::kOpen); break;
      case 'C': seq.slots.push_back(MouthSlot::kClosed); break;
      case 'D': seq.slots.push_back(MouthSlot::kDroppedJaw); break;
      default: seq.slots.push_back(MouthSlot::kMissing); break;
    }
  }
  return seq;
}

inline std::string Str(const MouthSequence& seq) {
  std::string out;
  for (MouthSlot s : seq.slots) out += "OCD."[static_cast<int>(s)];
  return out;
}

// Track whose entries follow the pattern; '.' leaves a frame out.
inline TrackRecord TrackFromPattern(const std::string& s, TrackId id = 1,
                                    std::int64_t start = 0) {
  TrackRecord t{id, {}};
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '.') continue;
    const MouthState state = s[i] == 'O'   ? MouthState::kOpen
                             : s[i] == 'C' ? MouthState::kClosed
                                           : MouthState::kDroppedJaw;
    t.entries.push_back({start + static_cast<std::int64_t>(i),
                         BBox::FromCorners(0, 0, 10, 10), state, 0.9});
  }
  return t;
}

// Repeats `cycle` n times.
inline std::string Repeat(const std::string& cycle, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) out += cycle;
  return out;
}

}  // namespace ventrate::testing_util

#endif  // VENTRATE_TESTS_TEST_UTIL_H_
