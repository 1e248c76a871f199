#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "crossmatch/core/error.hpp"
#include "crossmatch/core/geometry.hpp"

namespace crossmatch {

struct SensorDef {
  std::string id;
  Vec2 position;
};

enum class LineKind { primary, perpendicular };

struct SensorLine {
  std::string name;
  LineKind kind = LineKind::primary;
  std::vector<std::size_t> members;  // column indices, in line order
};

// Oriented axis of a sensor line: origin at the first member, unit vector
// towards the last one.
struct LineAxis {
  Vec2 origin;
  Vec2 unit;

  double coordinate(Vec2 p) const { return (p - origin).dot(unit); }
};

/// Planar sensor layout. The order of `sensors()` is the canonical column
/// order of every activation matrix built over this field.
class SensorField {
public:
  struct LineSpec {
    std::string name;
    LineKind kind;
    std::vector<std::string> sensor_ids;
  };

  SensorField() = default;

  SensorField(std::vector<SensorDef> sensors, const std::vector<LineSpec>& lines)
      : sensors_(std::move(sensors)) {
    for (std::size_t i = 0; i < sensors_.size(); ++i) {
      const auto& s = sensors_[i];
      require(!s.id.empty(), "sensor with empty id");
      require(std::isfinite(s.position.x) && std::isfinite(s.position.y),
              "sensor '" + s.id + "' has a non-finite position");
      require(index_.emplace(s.id, i).second, "duplicate sensor id '" + s.id + "'");
      for (std::size_t j = 0; j < i; ++j)
        require(!(sensors_[j].position == s.position),
                "sensors '" + sensors_[j].id + "' and '" + s.id + "' share a position");
    }
    for (const auto& spec : lines) {
      SensorLine line{spec.name, spec.kind, {}};
      for (const auto& id : spec.sensor_ids) {
        auto it = index_.find(id);
        require(it != index_.end(), "line '" + spec.name + "' references unknown sensor '" + id + "'");
        line.members.push_back(it->second);
      }
      require(!line.members.empty(), "line '" + spec.name + "' is empty");
      lines_.push_back(std::move(line));
    }
    require(lines_.size() >= 2, "a sensor field needs at least two lines");
    const auto* p = find_line(LineKind::primary);
    const auto* q = find_line(LineKind::perpendicular);
    require(p != nullptr, "no line tagged primary");
    require(q != nullptr, "no line tagged perpendicular");
    if (p->members.size() >= 2 && q->members.size() >= 2) {
      double c = std::abs(axis(*p).unit.dot(axis(*q).unit));
      require(c < 0.05, "perpendicular line is not perpendicular to the primary line");
    }
  }

  std::size_t size() const { return sensors_.size(); }
  const std::vector<SensorDef>& sensors() const { return sensors_; }
  const SensorDef& sensor(std::size_t col) const { return sensors_.at(col); }
  const std::vector<SensorLine>& lines() const { return lines_; }

  std::optional<std::size_t> index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const SensorLine& primary_line() const { return *find_line(LineKind::primary); }
  const SensorLine& perpendicular_line() const { return *find_line(LineKind::perpendicular); }

  LineAxis axis(const SensorLine& line) const {
    Vec2 a = sensors_[line.members.front()].position;
    if (line.members.size() < 2) {
      // Degenerate single-sensor line: orient it orthogonally to the primary.
      const auto& p = primary_line();
      if (&p != &line && p.members.size() >= 2) return {a, axis(p).unit.perp()};
      return {a, {1.0, 0.0}};
    }
    Vec2 b = sensors_[line.members.back()].position;
    Vec2 d = b - a;
    return {a, d * (1.0 / d.norm())};
  }

  // Lateral axis of the field: the primary direction turned a quarter CCW,
  // anchored where the perpendicular line crosses the primary line.
  LineAxis lateral_axis() const {
    auto pa = axis(primary_line());
    return {anchor(), pa.unit.perp()};
  }

  // Intersection of the primary line with the perpendicular line.
  Vec2 anchor() const {
    auto pa = axis(primary_line());
    auto qa = axis(perpendicular_line());
    double denom = pa.unit.cross(qa.unit);
    if (std::abs(denom) < 1e-12) return qa.origin;
    double s = (qa.origin - pa.origin).cross(qa.unit) / denom;
    return pa.origin + pa.unit * s;
  }

  Box2 bounds() const {
    Box2 b;
    for (const auto& s : sensors_) b.extend(s.position);
    return b;
  }

  // Column permutation induced by mirroring the field across the
  // perpendicular line. Empty when the layout is not mirror-symmetric.
  std::optional<std::vector<std::size_t>> reflection_map(double tol = 1e-6) const {
    auto pa = axis(primary_line());
    Vec2 c = anchor();
    std::vector<std::size_t> map(sensors_.size());
    for (std::size_t i = 0; i < sensors_.size(); ++i) {
      Vec2 p = sensors_[i].position;
      double along = (p - c).dot(pa.unit);
      Vec2 m = p - pa.unit * (2.0 * along);
      bool found = false;
      for (std::size_t j = 0; j < sensors_.size(); ++j) {
        if ((sensors_[j].position - m).norm() <= tol) {
          map[i] = j;
          found = true;
          break;
        }
      }
      if (!found) return std::nullopt;
    }
    return map;
  }

private:
  const SensorLine* find_line(LineKind k) const {
    for (const auto& l : lines_)
      if (l.kind == k) return &l;
    return nullptr;
  }

  std::vector<SensorDef> sensors_;
  std::vector<SensorLine> lines_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace crossmatch
