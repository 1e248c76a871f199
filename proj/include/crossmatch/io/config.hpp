#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crossmatch/core/error.hpp"
#include "crossmatch/detection/events.hpp"
#include "crossmatch/inverse/classifier.hpp"
#include "crossmatch/inverse/inverse.hpp"
#include "crossmatch/io/json_io.hpp"
#include "crossmatch/matching/match.hpp"
#include "crossmatch/sim/library.hpp"

namespace crossmatch::io {

// Relative paths inside a config file are taken relative to that file.
inline std::string resolve_path(const std::string& base_dir, const std::string& p) {
  if (p.empty() || base_dir.empty()) return p;
  std::filesystem::path path(p);
  if (path.is_absolute()) return p;
  auto out = (std::filesystem::path(base_dir) / path).lexically_normal();
  if (out.has_relative_path() && !out.has_filename()) out = out.parent_path();  // "dir/." -> "dir"
  return out.string();
}

inline std::string parent_dir(const std::string& file) {
  return std::filesystem::path(file).parent_path().string();
}

struct ClassifierConfig {
  std::optional<std::vector<SpanBin>> bins;  // empty = calibrate from the library
  double margin = 0.0;                       // m, widening applied when calibrating
};

struct PipelineConfig {
  std::string field_path;
  std::string taxonomy_path;
  std::string library_path;
  std::optional<double> dt;  // must agree with the library when given
  std::uint64_t seed = 0;
  EventPipelineConfig events;
  InverseConfig inverse;
  std::optional<MatchTolerances> tolerances;  // empty = half the library grid steps
  MatchOptions match;
  ClassifierConfig classifier;

  void validate() const {
    events.detector.validate();
    inverse.cluster.validate();
    require(events.max_fuse_gap >= 0, "max_fuse_gap must be non-negative");
    require(inverse.max_merge_dist >= 0 && inverse.max_merge_dt >= 0, "merge bounds must be non-negative");
    require(inverse.confidence_floor >= 0 && inverse.confidence_floor <= 1, "confidence_floor must lie in [0, 1]");
    require(match.min_overlap > 0 && match.min_overlap <= 1, "min_overlap must lie in (0, 1]");
    require(!dt || *dt > 0, "dt must be positive");
    if (tolerances) require(tolerances->velocity >= 0 && tolerances->angle >= 0, "tolerances must be non-negative");
  }
};

/// Overlays the keys present in `j` on `base`. Unknown top-level keys are
/// rejected so that typos do not pass silently.
inline PipelineConfig pipeline_config_from_json(const json& j, PipelineConfig base = {},
                                                const std::string& base_dir = "") {
  const std::string ctx = "config";
  require(j.is_object(), ctx + ": expected an object");
  static const std::set<std::string> known = {"field", "taxonomy", "library", "dt", "seed", "detector",
                                              "events", "cluster", "inverse", "tolerances", "match",
                                              "classifier", "schema_version"};
  for (const auto& [k, v] : j.items()) require(known.count(k) == 1, ctx + ": unknown key '" + k + "'");

  if (j.contains("field")) base.field_path = resolve_path(base_dir, get_field<std::string>(j, "field", ctx));
  if (j.contains("taxonomy")) base.taxonomy_path = resolve_path(base_dir, get_field<std::string>(j, "taxonomy", ctx));
  if (j.contains("library")) base.library_path = resolve_path(base_dir, get_field<std::string>(j, "library", ctx));
  if (j.contains("dt")) base.dt = get_field<double>(j, "dt", ctx);
  base.seed = get_or<std::uint64_t>(j, "seed", base.seed, ctx);
  if (j.contains("detector")) base.events.detector = detector_from_json(j["detector"], base.events.detector);
  if (j.contains("events")) {
    const auto& e = j["events"];
    base.events.max_fuse_gap = get_or<double>(e, "max_fuse_gap", base.events.max_fuse_gap, "events");
    base.events.direction_consistency =
        get_or<bool>(e, "direction_consistency", base.events.direction_consistency, "events");
    base.events.fuse = get_or<bool>(e, "fuse", base.events.fuse, "events");
  }
  if (j.contains("cluster")) {
    const auto& c = j["cluster"];
    auto& p = base.inverse.cluster;
    p.eps_space = get_or<double>(c, "eps_space", p.eps_space, "cluster");
    p.eps_time = get_or<double>(c, "eps_time", p.eps_time, "cluster");
    p.min_pts = get_or<std::size_t>(c, "min_pts", p.min_pts, "cluster");
  }
  if (j.contains("inverse")) {
    const auto& v = j["inverse"];
    auto& p = base.inverse;
    p.max_merge_dist = get_or<double>(v, "max_merge_dist", p.max_merge_dist, "inverse");
    p.max_merge_dt = get_or<double>(v, "max_merge_dt", p.max_merge_dt, "inverse");
    p.confidence_floor = get_or<double>(v, "confidence_floor", p.confidence_floor, "inverse");
    p.use_direction = get_or<bool>(v, "use_direction", p.use_direction, "inverse");
    p.use_velocity = get_or<bool>(v, "use_velocity", p.use_velocity, "inverse");
    p.use_angle = get_or<bool>(v, "use_angle", p.use_angle, "inverse");
    p.use_category = get_or<bool>(v, "use_category", p.use_category, "inverse");
  }
  if (j.contains("tolerances")) {
    MatchTolerances t = base.tolerances.value_or(MatchTolerances{});
    t.velocity = get_field<double>(j["tolerances"], "velocity", "tolerances");
    t.angle = get_field<double>(j["tolerances"], "angle", "tolerances");
    base.tolerances = t;
  }
  if (j.contains("match")) base.match.min_overlap = get_or<double>(j["match"], "min_overlap", base.match.min_overlap, "match");
  if (j.contains("classifier")) {
    const auto& c = j["classifier"];
    base.classifier.margin = get_or<double>(c, "margin", base.classifier.margin, "classifier");
    if (c.contains("bins")) {
      std::vector<SpanBin> bins;
      for (const auto& b : c["bins"])
        bins.push_back({get_field<std::string>(b, "category", "classifier bin"), get_field<double>(b, "lo", "classifier bin"),
                        get_field<double>(b, "hi", "classifier bin")});
      base.classifier.bins = std::move(bins);
    }
  }
  base.validate();
  return base;
}

inline PipelineConfig load_pipeline_config(const std::string& path, PipelineConfig base = {}) {
  return pipeline_config_from_json(load_json_file(path), std::move(base), parent_dir(path));
}

// What to generate for a closed-loop run: a library and, optionally, noisy
// observations of every library hypothesis.
struct ExperimentSpec {
  std::string field_path;
  std::string taxonomy_path;  // optional; categories then come from the geometries
  std::vector<ObjectGeometry> geometries;
  SimulationGrid grid;
  SimulationParams simulation;
  DetectorConfig detector;
  std::uint64_t seed = 0;
  std::vector<double> noise_levels;  // observation noise_sigma values; may be empty
  std::size_t repetitions = 1;       // observations per (noise level, record)
  bool ablate_inverse = false;       // all-wildcard H_real when matching observations
  unsigned threads = 0;

  void validate() const {
    require(!field_path.empty(), "experiment: 'field' is required");
    require(!geometries.empty(), "experiment: at least one geometry is required");
    grid.validate();
    detector.validate();
    require(repetitions >= 1, "experiment: repetitions must be >= 1");
    for (double s : noise_levels) require(std::isfinite(s) && s >= 0, "experiment: noise levels must be >= 0");
  }
};

inline ExperimentSpec experiment_from_json(const json& j, const std::string& base_dir = "") {
  const std::string ctx = "experiment";
  require(j.is_object(), ctx + ": expected an object");
  ExperimentSpec s;
  s.field_path = resolve_path(base_dir, get_field<std::string>(j, "field", ctx));
  s.taxonomy_path = resolve_path(base_dir, get_or<std::string>(j, "taxonomy", "", ctx));
  const auto& g = get_field<json>(j, "geometries", ctx);
  json list = g.is_string() ? load_json_file(resolve_path(base_dir, g.get<std::string>())) : g;
  require(list.is_array(), ctx + ": 'geometries' must be an array or a path to one");
  for (const auto& item : list) s.geometries.push_back(geometry_from_json(item));
  s.grid = detail::grid_from_json(get_field<json>(j, "grid", ctx));
  if (j.contains("simulation")) s.simulation = detail::params_from_json(j["simulation"]);
  if (j.contains("detector")) s.detector = detector_from_json(j["detector"]);
  s.seed = get_or<std::uint64_t>(j, "seed", 0, ctx);
  s.noise_levels = get_or<std::vector<double>>(j, "noise_levels", {}, ctx);
  s.repetitions = get_or<std::size_t>(j, "repetitions", 1, ctx);
  if (j.contains("ablation")) s.ablate_inverse = get_or<bool>(j["ablation"], "disable_inverse", false, ctx);
  s.threads = get_or<unsigned>(j, "threads", 0, ctx);
  s.validate();
  return s;
}

inline ExperimentSpec load_experiment(const std::string& path) {
  return experiment_from_json(load_json_file(path), parent_dir(path));
}

}  // namespace crossmatch::io
