#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "crossmatch/core/error.hpp"
#include "crossmatch/core/hypothesis.hpp"
#include "crossmatch/core/sensor_field.hpp"
#include "crossmatch/detection/events.hpp"
#include "crossmatch/matching/activation_matrix.hpp"
#include "crossmatch/sim/geometry.hpp"

namespace crossmatch {

struct SimulationConfig {
  SensorField field;
  Vec2 start_position;
  MotionVector motion;
  double detection_range = 4.0;  // m
  double noise_sigma = 0.0;      // field units, per axis
  double dt = 0.1;               // s per tick
  std::optional<double> duration;  // s; empty = run until the crossing is complete
  double d_min = 0.1;            // m, distance clamp of the 1/d^3 law
  double lead_in = 5.0;          // s the object rests at the start before moving

  void validate() const {
    require(motion.fully_specified(), "simulation motion must be fully specified");
    motion.validate();
    require(std::isfinite(dt) && dt > 0, "dt must be positive");
    require(std::isfinite(detection_range) && detection_range > 0, "detection_range must be positive");
    require(std::isfinite(noise_sigma) && noise_sigma >= 0, "noise_sigma must be non-negative");
    require(std::isfinite(d_min) && d_min > 0, "d_min must be positive");
    require(std::isfinite(lead_in) && lead_in >= 0, "lead_in must be non-negative");
    require(!duration || (std::isfinite(*duration) && *duration > 0), "duration must be positive");
  }
};

struct SimulationRecord {
  std::string id;
  Hypothesis hypothesis;
  std::vector<Reading> dataset;
  BinaryActivationMatrix activation;
  std::uint64_t seed = 0;
};

// Object pose along a straight crossing. The heading deviates by `angle`
// from the primary axis towards the field's lateral axis for both
// directions, so a `left` run is the mirror image of a `right` run.
struct CrossingKinematics {
  Vec2 heading;
  Vec2 forward;
  Vec2 left;

  CrossingKinematics(const SensorField& field, Direction d, double angle_deg) {
    Vec2 a = field.axis(field.primary_line()).unit;
    Vec2 n = a.perp();
    double r = deg2rad(angle_deg);
    double s = sign(d);
    heading = a * (s * std::cos(r)) + n * std::sin(r);
    forward = heading;
    left = heading.perp() * s;
  }

  Vec2 to_field(Vec2 ref, Vec2 local) const { return ref + forward * local.x + left * local.y; }
};

/// Start point from which the object's reference point travels through the
/// field anchor while every source starts outside the detection-inflated
/// bounding box.
inline Vec2 crossing_start(const SensorField& field, const ObjectGeometry& geometry, const MotionVector& motion,
                           double detection_range) {
  require(motion.direction && motion.angle, "crossing_start needs direction and angle");
  CrossingKinematics k(field, *motion.direction, *motion.angle);
  Box2 box = field.bounds().inflated(detection_range);
  Vec2 c = field.anchor();
  double reach = 0;
  for (Vec2 corner : {box.lo, box.hi, Vec2{box.lo.x, box.hi.y}, Vec2{box.hi.x, box.lo.y}})
    reach = std::max(reach, (corner - c).norm());
  return c - k.heading * (reach + geometry.radius() + 1.0);
}

// Clean (noise-free) scalar signal at `p` from sources at `positions`.
inline double clean_signal(Vec2 p, const std::vector<Vec2>& positions, const ObjectGeometry& g,
                           double detection_range, double d_min) {
  double s = 0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    double d = (positions[i] - p).norm();
    if (d > detection_range) continue;
    double dc = std::max(d, d_min);
    s += g.sources[i].strength / (dc * dc * dc);
  }
  return s;
}

/// One forward run. Readings are emitted tick by tick (t = k * dt) for every
/// sensor in canonical order; each axis carries the clean signal plus
/// independent Gaussian noise drawn from a generator seeded with `seed`.
inline SimulationRecord simulate(const ObjectGeometry& geometry, const SimulationConfig& cfg, std::uint64_t seed) {
  geometry.validate();
  cfg.validate();
  const auto& field = cfg.field;
  CrossingKinematics kin(field, *cfg.motion.direction, *cfg.motion.angle);
  const double v = *cfg.motion.velocity;
  const Box2 box = field.bounds().inflated(cfg.detection_range);
  const Vec2 centre = (box.lo + box.hi) * 0.5;
  // Travel after which a straight path can no longer reach the box.
  const double max_travel =
      (cfg.start_position - centre).norm() + (box.hi - box.lo).norm() + geometry.radius() + 1.0;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, cfg.noise_sigma > 0 ? cfg.noise_sigma : 1.0);

  SimulationRecord rec;
  rec.seed = seed;
  rec.hypothesis = {{geometry.type_id, geometry.category}, cfg.motion};

  std::vector<Vec2> pos(geometry.sources.size());
  bool entered = false;
  bool any_signal = false;
  constexpr std::size_t kMaxTicks = 10'000'000;
  for (std::size_t tick = 0;; ++tick) {
    require(tick < kMaxTicks, "simulation does not terminate");
    const double t = static_cast<double>(tick) * cfg.dt;
    if (cfg.duration && t > *cfg.duration + 1e-9) break;
    Vec2 ref = cfg.start_position + kin.heading * (v * std::max(0.0, t - cfg.lead_in));
    bool inside = false;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      pos[i] = kin.to_field(ref, geometry.sources[i].position);
      inside = inside || box.contains(pos[i]);
    }
    entered = entered || inside;
    for (const auto& s : field.sensors()) {
      double c = clean_signal(s.position, pos, geometry, cfg.detection_range, cfg.d_min);
      any_signal = any_signal || c > 0;
      Vec3 val{c, c, c};
      if (cfg.noise_sigma > 0) {
        val.x += noise(rng);
        val.y += noise(rng);
        val.z += noise(rng);
      }
      rec.dataset.push_back({s.id, t, val});
    }
    if (!cfg.duration && t > cfg.lead_in && ((entered && !inside) || v * (t - cfg.lead_in) > max_travel)) break;
  }
  require(any_signal, "geometry '" + geometry.type_id + "' never enters any sensor's detection range");
  return rec;
}

}  // namespace crossmatch
