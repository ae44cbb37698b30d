// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

// Line-delimited detection-stream format.
//
//   line 1:  {"meta":{"fps":30,"width":1280,"height":960,"source_id":"pen"}}
//   line k:  {"frame_index":0,"camera_motion":[a,b,tx,c,d,ty],
//             "detections":[{"x_min":..,"y_min":..,"x_max":..,"y_max":..,
//                            "state":"open","confidence":0.9}]}
//
// "camera_motion" is omitted when absent. Numbers carry at most six decimal
// places with trailing zeros removed; the writer always emits fields in the
// order shown, so parse -> write is byte-stable for canonical input.

#ifndef VENTRATE_STREAM_IO_H_
#define VENTRATE_STREAM_IO_H_

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ventrate/detection.h"

namespace ventrate {

// Malformed or out-of-contract input. `line()` is 1-based, 0 if unknown.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Canonical number rendering: fixed six decimals, trailing zeros and a
// trailing point stripped, "-0" normalized to "0".
std::string FormatNumber(double value);
void AppendNumber(std::string& out, double value);
void AppendJsonString(std::string& out, std::string_view value);

std::string FormatMetaLine(const VideoMeta& meta);
std::string FormatFrameLine(const FrameRecord& frame);

struct DetectionStream {
  VideoMeta meta;
  std::vector<FrameRecord> frames;

  bool operator==(const DetectionStream&) const = default;
};

// Sequential reader; frames are yielded in file order and validated to have
// strictly increasing indices.
class DetectionStreamReader {
 public:
  // Reads and validates the meta line immediately.
  explicit DetectionStreamReader(std::istream& in);

  const VideoMeta& meta() const { return meta_; }
  std::optional<FrameRecord> Next();

 private:
  std::istream& in_;
  VideoMeta meta_;
  std::size_t line_no_ = 0;
  std::optional<std::int64_t> last_index_;
};

DetectionStream ReadStream(std::istream& in);
DetectionStream ParseStream(std::string_view text);

void WriteStream(std::ostream& out, const VideoMeta& meta,
                 const std::vector<FrameRecord>& frames);
std::string WriteStream(const VideoMeta& meta,
                        const std::vector<FrameRecord>& frames);

// Parses a single frame line; exposed for tools that stream frames.
FrameRecord ParseFrameLine(std::string_view line, std::size_t line_no);

}  // namespace ventrate

#endif  // VENTRATE_STREAM_IO_H_
