#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "seld/error.hpp"
#include "seld/geometry.hpp"

namespace seld {

inline constexpr int kNumClasses = 11;
inline constexpr int kNumFrames = 3000;
inline constexpr double kFrameLenS = 0.02;
inline constexpr double kClipSeconds = 60.0;
inline constexpr int kSampleRate = 48000;

/// TAU 2019 event classes; class_id is the index into this list.
inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "clearthroat", "cough",    "doorslam", "drawer", "keyboard", "keysDrop",
    "knock",       "laughter", "pageturn", "phone",  "speech"};

inline int class_id_from_name(std::string_view name) {
  for (int i = 0; i < kNumClasses; ++i)
    if (kClassNames[i] == name) return i;
  return -1;
}

struct EventSpec {
  int class_id = 0;
  double onset_s = 0.0;
  double offset_s = 0.0;
  GridDoa doa;
};

struct SceneScript {
  std::vector<EventSpec> events;
  double duration_s = kClipSeconds;
};

struct FrameGrid {
  double frame_len_s = kFrameLenS;
  int n_frames = kNumFrames;

  double frame_center_s(int frame) const { return (frame + 0.5) * frame_len_s; }
};

/// Frame membership by frame-center containment in [onset, offset).
inline bool event_active_at(const EventSpec& e, double t) {
  return e.onset_s <= t && t < e.offset_s;
}

inline std::vector<int> active_event_indices(const SceneScript& script,
                                             const FrameGrid& grid, int frame) {
  std::vector<int> out;
  const double t = grid.frame_center_s(frame);
  for (int i = 0; i < static_cast<int>(script.events.size()); ++i)
    if (event_active_at(script.events[i], t)) out.push_back(i);
  return out;
}

/// Per-frame count of events covering the frame center.
inline std::vector<int> script_to_noas(const SceneScript& script, const FrameGrid& grid) {
  std::vector<int> counts(grid.n_frames, 0);
  for (const auto& e : script.events) {
    for (int f = 0; f < grid.n_frames; ++f)
      if (event_active_at(e, grid.frame_center_s(f))) ++counts[f];
  }
  return counts;
}

inline void validate_script(const SceneScript& script) {
  for (size_t i = 0; i < script.events.size(); ++i) {
    const auto& e = script.events[i];
    if (e.class_id < 0 || e.class_id >= kNumClasses)
      throw ValidationError("event " + std::to_string(i) + ": class_id out of range");
    if (!(0.0 <= e.onset_s && e.onset_s < e.offset_s && e.offset_s <= script.duration_s))
      throw ValidationError("event " + std::to_string(i) + ": bad onset/offset");
    if (e.doa.azimuth_deg % 10 != 0 || e.doa.elevation_deg % 10 != 0 ||
        e.doa.azimuth_deg < -180 || e.doa.azimuth_deg > 170 ||
        e.doa.elevation_deg < -90 || e.doa.elevation_deg > 90)
      throw ValidationError("event " + std::to_string(i) + ": DOA off the 10 degree grid");
  }
  // Overlap depth and same-DOA/class collisions, checked at boundary instants.
  for (size_t i = 0; i < script.events.size(); ++i) {
    const auto& a = script.events[i];
    for (size_t j = i + 1; j < script.events.size(); ++j) {
      const auto& b = script.events[j];
      const double lo = std::max(a.onset_s, b.onset_s);
      const double hi = std::min(a.offset_s, b.offset_s);
      if (lo >= hi) continue;
      if (a.doa == b.doa && a.class_id == b.class_id)
        throw ValidationError("events " + std::to_string(i) + "," + std::to_string(j) +
                              ": concurrent with identical DOA and class");
      int depth = 0;
      const double mid = 0.5 * (lo + hi);
      for (const auto& e : script.events)
        if (event_active_at(e, mid)) ++depth;
      if (depth > 2)
        throw ValidationError("more than 2 events active near t=" + std::to_string(mid));
    }
  }
}

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string format_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", s);
  return buf;
}

}  // namespace detail

inline constexpr std::string_view kMetadataHeader =
    "sound_event_recording,start_time,end_time,ele,azi,dist";

/// DCASE-style metadata CSV. The dist column is written as 1 and ignored on
/// parse.
inline std::string write_metadata_csv(const SceneScript& script) {
  std::string out{kMetadataHeader};
  out += '\n';
  for (const auto& e : script.events) {
    out += std::string(kClassNames[e.class_id]) + ',' + detail::format_seconds(e.onset_s) +
           ',' + detail::format_seconds(e.offset_s) + ',' +
           std::to_string(e.doa.elevation_deg) + ',' + std::to_string(e.doa.azimuth_deg) +
           ",1\n";
  }
  return out;
}

// validate=false is for decoded-event CSVs, which may break scene invariants
// when predictions were noisy.
inline SceneScript parse_metadata_csv(const std::string& text, bool validate = true) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError("metadata: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetadataHeader)
    throw ValidationError("metadata: unexpected header '" + line + "'");
  SceneScript script;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_row(line);
    if (cells.size() != 6)
      throw ValidationError("metadata row " + std::to_string(row) + ": expected 6 columns");
    EventSpec e;
    e.class_id = class_id_from_name(cells[0]);
    if (e.class_id < 0)
      throw ValidationError("metadata row " + std::to_string(row) +
                            ": unknown class '" + cells[0] + "'");
    try {
      e.onset_s = std::stod(cells[1]);
      e.offset_s = std::stod(cells[2]);
      e.doa.elevation_deg = std::stoi(cells[3]);
      e.doa.azimuth_deg = std::stoi(cells[4]);
    } catch (const std::exception&) {
      throw ValidationError("metadata row " + std::to_string(row) + ": malformed number");
    }
    script.events.push_back(e);
  }
  if (validate) {
    try {
      validate_script(script);
    } catch (const ValidationError& err) {
      throw ValidationError(std::string("metadata: ") + err.what());
    }
  }
  return script;
}

}  // namespace seld
