#pragma once

#include <optional>
#include <string>

#include "crossmatch/core/hypothesis.hpp"
#include "crossmatch/core/sensor_field.hpp"
#include "crossmatch/core/taxonomy.hpp"
#include "crossmatch/detection/events.hpp"
#include "crossmatch/inverse/classifier.hpp"
#include "crossmatch/inverse/cluster.hpp"
#include "crossmatch/inverse/motion.hpp"

namespace crossmatch {

struct InverseConfig {
  ClusterParams cluster;
  double max_merge_dist = 10.0;  // m
  double max_merge_dt = 2.0;     // s
  double confidence_floor = 0.5;
  // Per-component switches; a disabled component always yields a wildcard.
  bool use_direction = true;
  bool use_velocity = true;
  bool use_angle = true;
  bool use_category = true;
};

// Post-inverse situation, numbered as in the classic four-way split:
// 1 classified + motion, 2 classified only, 3 motion only, 4 neither.
struct InverseDiagnostics {
  bool direction = false;
  bool velocity = false;
  bool angle = false;
  bool classified = false;
  std::size_t clusters = 0;

  int scenario() const {
    bool motion = direction || velocity || angle;
    if (classified) return motion ? 1 : 2;
    return motion ? 3 : 4;
  }
};

struct InverseResult {
  MotionVector motion;
  std::optional<std::string> category;
  InverseDiagnostics diagnostics;

  Hypothesis pattern() const { return {{std::nullopt, category}, motion}; }
};

inline InverseResult run_inverse(const Event& event, const SensorField& field, const InverseConfig& cfg,
                                 const Classifier* model, const Taxonomy* taxonomy) {
  InverseResult r;
  if (event.empty()) return r;
  auto cl = cluster_activations(event, field, cfg.cluster);
  auto fused = fuse_clusters(cl.clusters, cfg.max_merge_dist, cfg.max_merge_dt);
  r.diagnostics.clusters = fused.size();
  auto mv = estimate_motion(event, field, fused);
  if (cfg.use_direction) r.motion.direction = mv.direction;
  if (cfg.use_velocity) r.motion.velocity = mv.velocity;
  if (cfg.use_angle) r.motion.angle = mv.angle;
  if (cfg.use_category && model && taxonomy) r.category = classify(event, field, *model, *taxonomy, cfg.confidence_floor);
  r.diagnostics.direction = r.motion.direction.has_value();
  r.diagnostics.velocity = r.motion.velocity.has_value();
  r.diagnostics.angle = r.motion.angle.has_value();
  r.diagnostics.classified = r.category.has_value();
  return r;
}

/// H_real: the members of H_0 compatible with every concrete field of the
/// inverse result. An all-wildcard result leaves H_0 untouched.
inline HypothesisSet build_h_real(const InverseResult& result, const HypothesisSet& h0, const MatchTolerances& tol) {
  HypothesisSet out(Provenance::inverse);
  auto pattern = result.pattern();
  for (const auto& h : h0)
    if (hypothesis_matches(h, pattern, tol)) out.insert(h);
  return out;
}

}  // namespace crossmatch
