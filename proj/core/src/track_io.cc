// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ventrate/track_io.h"

#include <sstream>

#include "json.hpp"
#include "ventrate/stream_io.h"

namespace ventrate {

using nlohmann::json;

std::string FormatTrackLine(const TrackRecord& track) {
  std::string out;
  out.reserve(32 + track.entries.size() * 90);
  out += "{\"track_id\":";
  out += std::to_string(track.track_id);
  out += ",\"entries\":[";
  for (std::size_t i = 0; i < track.entries.size(); ++i) {
    const TrackEntry& e = track.entries[i];
    if (i) out += ',';
    out += "{\"frame_index\":";
    out += std::to_string(e.frame_index);
    out += ",\"bbox\":[";
    AppendNumber(out, e.box.x_min);
    out += ',';
    AppendNumber(out, e.box.y_min);
    out += ',';
    AppendNumber(out, e.box.x_max);
    out += ',';
    AppendNumber(out, e.box.y_max);
    out += "],\"state\":\"";
    out += ToString(e.state);
    out += "\",\"confidence\":";
    AppendNumber(out, e.confidence);
    out += '}';
  }
  out += "]}";
  return out;
}

void WriteTracks(std::ostream& out, const std::vector<TrackRecord>& tracks,
                 std::int64_t frames, double fps) {
  std::size_t entries = 0;
  for (const TrackRecord& t : tracks) {
    out << FormatTrackLine(t) << '\n';
    entries += t.entries.size();
  }
  std::string summary = "{\"summary\":{\"tracks\":" +
                        std::to_string(tracks.size()) +
                        ",\"entries\":" + std::to_string(entries) +
                        ",\"frames\":" + std::to_string(frames) + ",\"fps\":";
  AppendNumber(summary, fps);
  summary += "}}";
  out << summary << '\n';
}

std::string WriteTracks(const std::vector<TrackRecord>& tracks,
                        std::int64_t frames, double fps) {
  std::ostringstream out;
  WriteTracks(out, tracks, frames, fps);
  return out.str();
}

namespace {

TrackEntry ParseEntry(const json& e, std::size_t line_no) {
  if (!e.is_object()) throw FormatError(line_no, "entry must be an object");
  try {
    TrackEntry entry;
    entry.frame_index = e.at("frame_index").get<std::int64_t>();
    const json& b = e.at("bbox");
    if (!b.is_array() || b.size() != 4) {
      throw FormatError(line_no, "bbox must hold four numbers");
    }
    entry.box = BBox::FromCorners(b[0].get<double>(), b[1].get<double>(),
                                  b[2].get<double>(), b[3].get<double>());
    entry.state = ParseMouthState(e.at("state").get<std::string>());
    entry.confidence = e.at("confidence").get<double>();
    return entry;
  } catch (const json::exception& ex) {
    throw FormatError(line_no, std::string("bad track entry: ") + ex.what());
  } catch (const std::invalid_argument& ex) {
    throw FormatError(line_no, ex.what());
  }
}

}  // namespace

TrackFile ReadTracks(std::istream& in) {
  TrackFile file;
  bool have_summary = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (have_summary) throw FormatError(line_no, "record after summary line");
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw FormatError(line_no, "record must be object");
    if (auto s = doc.find("summary"); s != doc.end()) {
      try {
        file.summary.tracks = s->at("tracks").get<std::size_t>();
        file.summary.entries = s->at("entries").get<std::size_t>();
        file.summary.frames = s->at("frames").get<std::int64_t>();
        file.summary.fps = s->at("fps").get<double>();
      } catch (const json::exception& e) {
        throw FormatError(line_no, std::string("bad summary: ") + e.what());
      }
      have_summary = true;
      continue;
    }
    TrackRecord track;
    try {
      track.track_id = doc.at("track_id").get<TrackId>();
    } catch (const json::exception&) {
      throw FormatError(line_no, "missing track_id");
    }
    const auto entries = doc.find("entries");
    if (entries == doc.end() || !entries->is_array() || entries->empty()) {
      throw FormatError(line_no, "track needs a non-empty 'entries' array");
    }
    for (const json& e : *entries) {
      TrackEntry entry = ParseEntry(e, line_no);
      if (!track.entries.empty() &&
          entry.frame_index <= track.entries.back().frame_index) {
        throw FormatError(line_no, "entry frame indices must increase");
      }
      track.entries.push_back(entry);
    }
    file.tracks.push_back(std::move(track));
  }
  if (!have_summary) throw FormatError(line_no, "missing summary line");
  std::size_t entries = 0;
  for (const TrackRecord& t : file.tracks) entries += t.entries.size();
  if (file.summary.tracks != file.tracks.size() ||
      file.summary.entries != entries) {
    throw FormatError(line_no, "summary counts do not match records");
  }
  return file;
}

TrackFile ParseTracks(std::string_view text) {
  std::istringstream in{std::string(text)};
  return ReadTracks(in);
}

}  // namespace ventrate
