#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crossmatch/core/error.hpp"
#include "crossmatch/core/hypothesis.hpp"
#include "crossmatch/core/sensor_field.hpp"
#include "crossmatch/core/taxonomy.hpp"
#include "crossmatch/detection/zscore.hpp"
#include "crossmatch/sim/geometry.hpp"

namespace crossmatch::io {

using nlohmann::json;

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

// Reads `key` from `j` with a typed error naming the context.
template <typename T>
T get_field(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(ctx + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(ctx + ": bad '" + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return get_field<T>(j, key, ctx);
}

// ---- sensor field ---------------------------------------------------------

inline json to_json(const SensorField& f) {
  json sensors = json::array();
  for (const auto& s : f.sensors()) sensors.push_back({{"id", s.id}, {"x", s.position.x}, {"y", s.position.y}});
  json lines = json::array();
  for (const auto& l : f.lines()) {
    json ids = json::array();
    for (auto m : l.members) ids.push_back(f.sensor(m).id);
    lines.push_back({{"name", l.name},
                     {"kind", l.kind == LineKind::primary ? "primary" : "perpendicular"},
                     {"sensors", ids}});
  }
  return {{"sensors", sensors}, {"lines", lines}};
}

inline SensorField field_from_json(const json& j) {
  const std::string ctx = "sensor field";
  require(j.is_object() && j.contains("sensors") && j.contains("lines"), ctx + ": needs 'sensors' and 'lines'");
  std::vector<SensorDef> sensors;
  for (const auto& s : j.at("sensors"))
    sensors.push_back({get_field<std::string>(s, "id", ctx),
                       {get_field<double>(s, "x", ctx), get_field<double>(s, "y", ctx)}});
  std::vector<SensorField::LineSpec> lines;
  for (const auto& l : j.at("lines")) {
    auto kind = get_field<std::string>(l, "kind", ctx);
    require(kind == "primary" || kind == "perpendicular", ctx + ": line kind must be primary or perpendicular");
    lines.push_back({get_or<std::string>(l, "name", "", ctx),
                     kind == "primary" ? LineKind::primary : LineKind::perpendicular,
                     get_field<std::vector<std::string>>(l, "sensors", ctx)});
  }
  return SensorField(std::move(sensors), lines);
}

// ---- taxonomy -------------------------------------------------------------

inline json to_json(const Taxonomy& t) {
  return {{"category_scheme", t.category_scheme()}, {"schemes", t.schemes()}};
}

inline Taxonomy taxonomy_from_json(const json& j) {
  const std::string ctx = "taxonomy";
  return Taxonomy(get_field<std::string>(j, "category_scheme", ctx),
                  get_field<std::map<std::string, std::map<std::string, std::string>>>(j, "schemes", ctx));
}

// ---- hypotheses -----------------------------------------------------------

inline json opt_json(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }
inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json to_json(const MotionVector& m) {
  return {{"direction", m.direction ? json(to_string(*m.direction)) : json(nullptr)},
          {"velocity", opt_json(m.velocity)},
          {"angle", opt_json(m.angle)}};
}

inline json to_json(const Hypothesis& h) {
  json j = to_json(h.motion);
  j["type"] = opt_json(h.label.object_type);
  j["category"] = opt_json(h.label.category);
  return j;
}

inline Hypothesis hypothesis_from_json(const json& j) {
  const std::string ctx = "hypothesis";
  Hypothesis h;
  if (j.contains("type") && !j["type"].is_null()) h.label.object_type = get_field<std::string>(j, "type", ctx);
  if (j.contains("category") && !j["category"].is_null())
    h.label.category = get_field<std::string>(j, "category", ctx);
  if (j.contains("direction") && !j["direction"].is_null())
    h.motion.direction = parse_direction(get_field<std::string>(j, "direction", ctx));
  if (j.contains("velocity") && !j["velocity"].is_null()) h.motion.velocity = get_field<double>(j, "velocity", ctx);
  if (j.contains("angle") && !j["angle"].is_null()) h.motion.angle = get_field<double>(j, "angle", ctx);
  h.motion.validate();
  return h;
}

// ---- detector -------------------------------------------------------------

inline json to_json(const DetectorConfig& c) {
  return {{"lag", c.lag}, {"z_threshold", c.z_threshold}, {"influence", c.influence}, {"min_gap", c.min_gap}};
}

inline DetectorConfig detector_from_json(const json& j, DetectorConfig base = {}) {
  const std::string ctx = "detector";
  base.lag = get_or<std::size_t>(j, "lag", base.lag, ctx);
  base.z_threshold = get_or<double>(j, "z_threshold", base.z_threshold, ctx);
  base.influence = get_or<double>(j, "influence", base.influence, ctx);
  base.min_gap = get_or<double>(j, "min_gap", base.min_gap, ctx);
  base.validate();
  return base;
}

// ---- geometry -------------------------------------------------------------

inline json to_json(const ObjectGeometry& g) {
  json outline = json::array();
  for (auto p : g.outline) outline.push_back({p.x, p.y});
  json sources = json::array();
  for (const auto& s : g.sources)
    sources.push_back({{"x", s.position.x}, {"y", s.position.y}, {"strength", s.strength}});
  return {{"type", g.type_id}, {"category", g.category}, {"outline", outline}, {"sources", sources}};
}

inline ObjectGeometry geometry_from_json(const json& j) {
  std::string ctx = "geometry";
  ObjectGeometry g;
  g.type_id = get_field<std::string>(j, "type", ctx);
  ctx += " '" + g.type_id + "'";
  g.category = get_or<std::string>(j, "category", "", ctx);
  for (const auto& p : get_field<std::vector<std::vector<double>>>(j, "outline", ctx)) {
    require(p.size() == 2, ctx + ": outline vertices must be [x, y]");
    g.outline.push_back({p[0], p[1]});
  }
  for (const auto& s : get_field<json>(j, "sources", ctx))
    g.sources.push_back({{get_field<double>(s, "x", ctx), get_field<double>(s, "y", ctx)},
                         get_or<double>(s, "strength", 1.0, ctx)});
  g.validate();
  return g;
}

}  // namespace crossmatch::io
