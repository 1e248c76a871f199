#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crossmatch/core/error.hpp"
#include "crossmatch/core/fit.hpp"
#include "crossmatch/core/hypothesis.hpp"
#include "crossmatch/core/sensor_field.hpp"
#include "crossmatch/detection/zscore.hpp"

namespace crossmatch {

struct Reading {
  std::string sensor_id;
  double t = 0.0;
  Vec3 value;

  bool operator==(const Reading&) const = default;
};

struct ActivationFrame {
  double t = 0.0;
  std::vector<std::size_t> active;  // column indices, ascending
  std::vector<double> magnitudes;   // parallel to `active`
};

struct Event {
  std::string id;
  double t0 = 0.0;
  double tk = 0.0;
  std::vector<ActivationFrame> frames;
  std::vector<Reading> readings;

  bool empty() const { return frames.empty(); }
};

/// Runs one detector per sensor over the readings and collects, per distinct
/// timestamp, the sensors that fired. Only non-empty frames are returned.
inline std::vector<ActivationFrame> detect_activations(std::span<const Reading> readings,
                                                       const SensorField& field,
                                                       const DetectorConfig& cfg) {
  cfg.validate();
  std::vector<DetectorState> states(field.size());
  std::vector<double> last_t(field.size(), -std::numeric_limits<double>::infinity());
  std::map<double, ActivationFrame> frames;
  std::size_t row = 0;
  for (const auto& r : readings) {
    ++row;
    auto col = field.index_of(r.sensor_id);
    require(col.has_value(), "reading " + std::to_string(row) + ": unknown sensor '" + r.sensor_id + "'");
    require(std::isfinite(r.t), "reading " + std::to_string(row) + ": non-finite timestamp");
    require(r.t >= last_t[*col], "reading " + std::to_string(row) + ": timestamps of sensor '" +
                                     r.sensor_id + "' go backwards");
    last_t[*col] = r.t;
    Activation a = update_threshold(states[*col], r.value, cfg);
    if (!a.active) continue;
    auto& f = frames[r.t];
    f.t = r.t;
    auto pos = std::lower_bound(f.active.begin(), f.active.end(), *col);
    if (pos != f.active.end() && *pos == *col) continue;  // duplicate sample at same instant
    auto at = pos - f.active.begin();
    f.active.insert(pos, *col);
    f.magnitudes.insert(f.magnitudes.begin() + at, a.magnitude);
  }
  std::vector<ActivationFrame> out;
  out.reserve(frames.size());
  for (auto& [t, f] : frames) out.push_back(std::move(f));
  return out;
}

/// Groups active frames into events; a silence longer than `cfg.min_gap`
/// closes the current event. Readings (sorted by time) falling inside an
/// event's [t0, tk] are attached to it.
inline std::vector<Event> segment_events(std::span<const ActivationFrame> frames, const DetectorConfig& cfg,
                                         std::span<const Reading> readings = {}) {
  std::vector<Event> events;
  for (const auto& f : frames) {
    if (f.active.empty()) continue;
    if (events.empty() || f.t - events.back().tk > cfg.min_gap) {
      Event e;
      e.t0 = f.t;
      events.push_back(std::move(e));
    }
    auto& e = events.back();
    e.tk = f.t;
    e.frames.push_back(f);
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    auto& e = events[i];
    e.id = "e" + std::to_string(i);
    for (const auto& r : readings)
      if (r.t >= e.t0 && r.t <= e.tk) e.readings.push_back(r);
  }
  return events;
}

// First activation time of every primary-line sensor that fired, paired with
// its coordinate along the primary axis.
struct LineOnsets {
  std::vector<double> coordinate;
  std::vector<double> onset;
};

inline LineOnsets primary_onsets(std::span<const ActivationFrame> frames, const SensorField& field) {
  const auto& line = field.primary_line();
  auto ax = field.axis(line);
  std::map<std::size_t, double> first;
  for (const auto& f : frames)
    for (auto c : f.active) first.try_emplace(c, f.t);
  LineOnsets out;
  for (auto c : line.members) {
    auto it = first.find(c);
    if (it == first.end()) continue;
    out.coordinate.push_back(ax.coordinate(field.sensor(c).position));
    out.onset.push_back(it->second);
  }
  return out;
}

// Sign of the onset-time slope along the primary line; empty if undetermined.
inline std::optional<Direction> coarse_direction(std::span<const ActivationFrame> frames,
                                                 const SensorField& field) {
  auto on = primary_onsets(frames, field);
  auto fit = least_squares(on.coordinate, on.onset);
  if (!fit || std::abs(fit->slope) < 1e-12) return std::nullopt;
  return fit->slope > 0 ? Direction::right : Direction::left;
}

/// Greedy left-to-right merge of consecutive events separated by at most
/// `max_fuse_gap` seconds. With `direction_consistency`, events whose coarse
/// directions are both known and disagree are kept apart (requires `field`).
inline std::vector<Event> fuse_events(std::span<const Event> events, double max_fuse_gap,
                                      bool direction_consistency, const SensorField* field = nullptr) {
  require(!direction_consistency || field != nullptr, "direction-consistent fusion needs a sensor field");
  std::vector<Event> out;
  for (const auto& e : events) {
    if (!out.empty()) {
      auto& last = out.back();
      require(e.t0 >= last.tk, "events to fuse must be time-ordered and non-overlapping");
      bool close = e.t0 - last.tk <= max_fuse_gap;
      bool agree = true;
      if (close && direction_consistency) {
        auto a = coarse_direction(last.frames, *field);
        auto b = coarse_direction(e.frames, *field);
        agree = !a || !b || *a == *b;
      }
      if (close && agree) {
        last.tk = e.tk;
        last.frames.insert(last.frames.end(), e.frames.begin(), e.frames.end());
        last.readings.insert(last.readings.end(), e.readings.begin(), e.readings.end());
        continue;
      }
    }
    out.push_back(e);
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = "e" + std::to_string(i);
  return out;
}

struct EventPipelineConfig {
  DetectorConfig detector;
  double max_fuse_gap = 5.0;
  bool direction_consistency = true;
  bool fuse = true;
};

// readings → activations → segmentation → optional fusion.
inline std::vector<Event> detect_events(std::span<const Reading> readings, const SensorField& field,
                                        const EventPipelineConfig& cfg) {
  auto frames = detect_activations(readings, field, cfg.detector);
  auto events = segment_events(frames, cfg.detector, readings);
  if (cfg.fuse) events = fuse_events(events, cfg.max_fuse_gap, cfg.direction_consistency, &field);
  return events;
}

}  // namespace crossmatch
