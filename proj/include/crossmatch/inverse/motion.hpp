#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <vector>

#include "crossmatch/core/fit.hpp"
#include "crossmatch/core/hypothesis.hpp"
#include "crossmatch/core/sensor_field.hpp"
#include "crossmatch/detection/events.hpp"
#include "crossmatch/inverse/cluster.hpp"

namespace crossmatch {

namespace detail {
// Points of the most populated cluster; every event point when there is none.
inline std::vector<SpaceTimePoint> dominant_points(const Event& event, const SensorField& field,
                                                   std::span<const Cluster> clusters) {
  const Cluster* best = nullptr;
  for (const auto& c : clusters)
    if (!best || c.points.size() > best->points.size()) best = &c;
  if (best) return best->points;
  return event_points(event, field);
}
}  // namespace detail

/// Direction and speed from the onset times along the primary line, angle
/// from the activation-time skew across the perpendicular line. Anything the
/// data cannot support stays a wildcard.
inline MotionVector estimate_motion(const Event& event, const SensorField& field, std::span<const Cluster> clusters) {
  MotionVector mv;
  if (event.empty()) return mv;
  auto pts = detail::dominant_points(event, field, clusters);

  // Onset time per primary-line sensor vs. its coordinate along the line.
  const auto& primary = field.primary_line();
  auto pax = field.axis(primary);
  std::map<std::size_t, double> onset;
  for (const auto& p : pts) {
    auto [it, fresh] = onset.try_emplace(p.column, p.t);
    if (!fresh) it->second = std::min(it->second, p.t);
  }
  std::vector<double> xs, ts;
  for (auto c : primary.members) {
    auto it = onset.find(c);
    if (it == onset.end()) continue;
    xs.push_back(pax.coordinate(field.sensor(c).position));
    ts.push_back(it->second);
  }
  auto fit = least_squares(xs, ts);
  if (!fit || std::abs(fit->slope) < 1e-9) return mv;
  mv.direction = fit->slope > 0 ? Direction::right : Direction::left;
  mv.velocity = 1.0 / std::abs(fit->slope);

  // Closest approach to a perpendicular-line sensor at lateral offset w
  // happens at t_anchor + w * sin(angle) / v. Use the magnitude-weighted
  // mean activation time per sensor as the closest-approach estimate.
  const auto& perp = field.perpendicular_line();
  auto lat = field.lateral_axis();
  std::map<std::size_t, std::pair<double, double>> acc;  // column -> (sum w*t, sum w)
  for (const auto& p : pts) {
    if (std::find(perp.members.begin(), perp.members.end(), p.column) == perp.members.end()) continue;
    double w = std::max(p.magnitude, 1e-12);
    acc[p.column].first += w * p.t;
    acc[p.column].second += w;
  }
  if (acc.size() < 2) return mv;
  std::vector<double> ws, tbar;
  for (const auto& [c, s] : acc) {
    ws.push_back(lat.coordinate(field.sensor(c).position));
    tbar.push_back(s.first / s.second);
  }
  auto afit = least_squares(ws, tbar);
  if (!afit) return mv;
  double s = afit->slope * *mv.velocity;
  if (std::abs(s) >= 1.0) return mv;
  double a = rad2deg(std::asin(s));
  if (a >= -90.0 && a < 90.0) mv.angle = a;
  return mv;
}

}  // namespace crossmatch
