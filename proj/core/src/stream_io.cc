// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ventrate/stream_io.h"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace ventrate {

using nlohmann::json;

FormatError::FormatError(std::size_t line, const std::string& what)
    : std::runtime_error(line == 0 ? what
                                   : "line " + std::to_string(line) + ": " +
                                         what),
      line_(line) {}

void AppendNumber(std::string& out, double value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("cannot serialize non-finite number");
  }
  char buf[64];
  int n = std::snprintf(buf, sizeof(buf), "%.6f", value);
  while (n > 0 && buf[n - 1] == '0') --n;
  if (n > 0 && buf[n - 1] == '.') --n;
  std::string_view text(buf, static_cast<std::size_t>(n));
  if (text == "-0") text = "0";
  out.append(text);
}

std::string FormatNumber(double value) {
  std::string out;
  AppendNumber(out, value);
  return out;
}

void AppendJsonString(std::string& out, std::string_view value) {
  out += json(std::string(value)).dump();
}

std::string FormatMetaLine(const VideoMeta& meta) {
  std::string out = "{\"meta\":{\"fps\":";
  AppendNumber(out, meta.fps);
  out += ",\"width\":";
  out += std::to_string(meta.width);
  out += ",\"height\":";
  out += std::to_string(meta.height);
  out += ",\"source_id\":";
  AppendJsonString(out, meta.source_id);
  out += "}}";
  return out;
}

std::string FormatFrameLine(const FrameRecord& frame) {
  std::string out;
  out.reserve(64 + frame.detections.size() * 110);
  out += "{\"frame_index\":";
  out += std::to_string(frame.frame_index);
  if (frame.camera_motion) {
    out += ",\"camera_motion\":[";
    const auto v = frame.camera_motion->ToArray();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ',';
      AppendNumber(out, v[i]);
    }
    out += ']';
  }
  out += ",\"detections\":[";
  for (std::size_t i = 0; i < frame.detections.size(); ++i) {
    const Detection& d = frame.detections[i];
    if (i) out += ',';
    out += "{\"x_min\":";
    AppendNumber(out, d.box.x_min);
    out += ",\"y_min\":";
    AppendNumber(out, d.box.y_min);
    out += ",\"x_max\":";
    AppendNumber(out, d.box.x_max);
    out += ",\"y_max\":";
    AppendNumber(out, d.box.y_max);
    out += ",\"state\":\"";
    out += ToString(d.state);
    out += "\",\"confidence\":";
    AppendNumber(out, d.confidence);
    out += '}';
  }
  out += "]}";
  return out;
}

namespace {

json ParseJson(std::string_view line, std::size_t line_no) {
  try {
    return json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    throw FormatError(line_no, std::string("invalid JSON: ") + e.what());
  }
}

template <typename T>
T Field(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw FormatError(line_no, std::string("missing field '") + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw FormatError(line_no, std::string("bad type for field '") + key + "'");
  }
}

double NumberField(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw FormatError(line_no,
                      std::string("missing or non-numeric field '") + key + "'");
  }
  return it->get<double>();
}

bool IsBlank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

VideoMeta ParseMetaLine(std::string_view line, std::size_t line_no) {
  const json doc = ParseJson(line, line_no);
  if (!doc.is_object() || !doc.contains("meta") || !doc["meta"].is_object()) {
    throw FormatError(line_no, "first line must be a meta record");
  }
  const json& m = doc["meta"];
  VideoMeta meta;
  meta.fps = NumberField(m, "fps", line_no);
  meta.width = Field<int>(m, "width", line_no);
  meta.height = Field<int>(m, "height", line_no);
  meta.source_id = Field<std::string>(m, "source_id", line_no);
  if (!(meta.fps > 0.0)) throw FormatError(line_no, "fps must be positive");
  if (meta.width <= 0 || meta.height <= 0) {
    throw FormatError(line_no, "frame size must be positive");
  }
  return meta;
}

}  // namespace

FrameRecord ParseFrameLine(std::string_view line, std::size_t line_no) {
  const json doc = ParseJson(line, line_no);
  if (!doc.is_object()) throw FormatError(line_no, "frame must be an object");
  FrameRecord frame;
  frame.frame_index = Field<std::int64_t>(doc, "frame_index", line_no);
  if (frame.frame_index < 0) {
    throw FormatError(line_no, "frame_index must be non-negative");
  }
  if (auto it = doc.find("camera_motion"); it != doc.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != 6) {
      throw FormatError(line_no, "camera_motion must hold six numbers");
    }
    std::array<double, 6> v{};
    for (std::size_t i = 0; i < 6; ++i) {
      if (!(*it)[i].is_number()) {
        throw FormatError(line_no, "camera_motion must hold six numbers");
      }
      v[i] = (*it)[i].get<double>();
    }
    frame.camera_motion = Affine2D::FromArray(v);
  }
  const auto dets = doc.find("detections");
  if (dets == doc.end() || !dets->is_array()) {
    throw FormatError(line_no, "missing 'detections' array");
  }
  frame.detections.reserve(dets->size());
  for (const json& d : *dets) {
    if (!d.is_object()) throw FormatError(line_no, "detection must be object");
    Detection det;
    try {
      det.box = BBox::FromCorners(
          NumberField(d, "x_min", line_no), NumberField(d, "y_min", line_no),
          NumberField(d, "x_max", line_no), NumberField(d, "y_max", line_no));
      det.state = ParseMouthState(Field<std::string>(d, "state", line_no));
    } catch (const std::invalid_argument& e) {
      throw FormatError(line_no, e.what());
    }
    det.confidence = NumberField(d, "confidence", line_no);
    if (!(det.confidence >= 0.0 && det.confidence <= 1.0)) {
      throw FormatError(line_no, "confidence outside [0, 1]");
    }
    frame.detections.push_back(det);
  }
  return frame;
}

DetectionStreamReader::DetectionStreamReader(std::istream& in) : in_(in) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (IsBlank(line)) continue;
    meta_ = ParseMetaLine(line, line_no_);
    return;
  }
  throw FormatError(line_no_, "empty stream: missing meta line");
}

std::optional<FrameRecord> DetectionStreamReader::Next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (IsBlank(line)) continue;
    FrameRecord frame = ParseFrameLine(line, line_no_);
    if (last_index_ && frame.frame_index <= *last_index_) {
      throw FormatError(line_no_, "frame_index " +
                                      std::to_string(frame.frame_index) +
                                      " is not greater than " +
                                      std::to_string(*last_index_));
    }
    last_index_ = frame.frame_index;
    return frame;
  }
  return std::nullopt;
}

DetectionStream ReadStream(std::istream& in) {
  DetectionStreamReader reader(in);
  DetectionStream stream;
  stream.meta = reader.meta();
  while (auto frame = reader.Next()) stream.frames.push_back(std::move(*frame));
  return stream;
}

DetectionStream ParseStream(std::string_view text) {
  std::istringstream in{std::string(text)};
  return ReadStream(in);
}

void WriteStream(std::ostream& out, const VideoMeta& meta,
                 const std::vector<FrameRecord>& frames) {
  out << FormatMetaLine(meta) << '\n';
  for (const FrameRecord& frame : frames) out << FormatFrameLine(frame) << '\n';
}

std::string WriteStream(const VideoMeta& meta,
                        const std::vector<FrameRecord>& frames) {
  std::ostringstream out;
  WriteStream(out, meta, frames);
  return out.str();
}

}  // namespace ventrate
