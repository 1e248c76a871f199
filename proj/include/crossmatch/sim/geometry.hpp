#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "crossmatch/core/error.hpp"
#include "crossmatch/core/geometry.hpp"

namespace crossmatch {

struct PointSource {
  Vec2 position;  // object frame: x forward, y to the left
  double strength = 1.0;
};

/// Rigid object model. Only the point sources interact with sensors; the
/// outline is carried along as descriptive metadata.
struct ObjectGeometry {
  std::string type_id;
  std::string category;
  std::vector<Vec2> outline;
  std::vector<PointSource> sources;

  double radius() const {
    double r = 0;
    for (const auto& s : sources) r = std::max(r, s.position.norm());
    for (const auto& p : outline) r = std::max(r, p.norm());
    return r;
  }

  void validate() const {
    require(!type_id.empty(), "geometry without type id");
    require(!sources.empty(), "geometry '" + type_id + "' has no sources");
    for (const auto& s : sources)
      require(std::isfinite(s.position.x) && std::isfinite(s.position.y) && std::isfinite(s.strength) &&
                  s.strength >= 0,
              "geometry '" + type_id + "' has an invalid source");
    require(is_simple_polygon(outline), "geometry '" + type_id + "' outline is not a simple polygon");
  }

  static bool is_simple_polygon(const std::vector<Vec2>& poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (const auto& p : poly)
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
    auto orient = [](Vec2 a, Vec2 b, Vec2 c) {
      double v = (b - a).cross(c - a);
      return (v > 1e-12) - (v < -1e-12);
    };
    auto on_seg = [](Vec2 a, Vec2 b, Vec2 p) {
      return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
             std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
    };
    auto intersects = [&](Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
      int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
      if (o1 != o2 && o3 != o4) return true;
      return (o1 == 0 && on_seg(a, b, c)) || (o2 == 0 && on_seg(a, b, d)) || (o3 == 0 && on_seg(c, d, a)) ||
             (o4 == 0 && on_seg(c, d, b));
    };
    double area = 0;
    for (std::size_t i = 0; i < n; ++i) area += poly[i].cross(poly[(i + 1) % n]);
    if (std::abs(area) < 1e-12) return false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
        if (adjacent) continue;
        if (intersects(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
      }
    }
    return true;
  }
};

}  // namespace crossmatch
