#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <vector>

#include "crossmatch/core/error.hpp"
#include "crossmatch/core/sensor_field.hpp"
#include "crossmatch/detection/events.hpp"

namespace crossmatch {

struct ClusterParams {
  double eps_space = 4.5;  // m
  double eps_time = 0.5;   // s
  std::size_t min_pts = 3;

  void validate() const {
    require(eps_space > 0 && eps_time > 0 && min_pts > 0, "cluster parameters must be positive");
  }
};

struct SpaceTimePoint {
  std::size_t column = 0;
  Vec2 position;
  double t = 0.0;
  double magnitude = 0.0;
};

struct Cluster {
  std::vector<SpaceTimePoint> points;
  Vec2 centroid;
  double t_centroid = 0.0;

  void update_centroid() {
    Vec2 c;
    double t = 0;
    for (const auto& p : points) {
      c = c + p.position;
      t += p.t;
    }
    double n = static_cast<double>(points.size());
    centroid = c * (1.0 / n);
    t_centroid = t / n;
  }
};

struct ClusterResult {
  std::vector<SpaceTimePoint> points;  // in (t, column) order
  std::vector<int> labels;             // cluster index per point, -1 = noise
  std::vector<Cluster> clusters;
};

inline std::vector<SpaceTimePoint> event_points(const Event& event, const SensorField& field) {
  std::vector<SpaceTimePoint> pts;
  for (const auto& f : event.frames)
    for (std::size_t i = 0; i < f.active.size(); ++i)
      pts.push_back({f.active[i], field.sensor(f.active[i]).position, f.t,
                     i < f.magnitudes.size() ? f.magnitudes[i] : 1.0});
  return pts;
}

/// Density-based clustering over (sensor position, activation time) with
/// separate spatial and temporal radii. A point is core when at least
/// `min_pts` points (itself included) lie within both radii.
inline ClusterResult cluster_activations(const Event& event, const SensorField& field, const ClusterParams& p) {
  p.validate();
  require(!event.empty(), "cannot cluster an empty event");
  ClusterResult res;
  res.points = event_points(event, field);
  const auto& pts = res.points;
  const std::size_t n = pts.size();
  constexpr int kUnvisited = -2, kNoise = -1;
  res.labels.assign(n, kUnvisited);

  // Points are time-sorted, so the temporal window bounds the scan.
  auto neighbours = [&](std::size_t i) {
    std::vector<std::size_t> out;
    std::size_t lo = i;
    while (lo > 0 && pts[i].t - pts[lo - 1].t <= p.eps_time) --lo;
    for (std::size_t j = lo; j < n && pts[j].t - pts[i].t <= p.eps_time; ++j)
      if ((pts[j].position - pts[i].position).norm() <= p.eps_space) out.push_back(j);
    return out;
  };

  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (res.labels[i] != kUnvisited) continue;
    auto nb = neighbours(i);
    if (nb.size() < p.min_pts) {
      res.labels[i] = kNoise;
      continue;
    }
    int id = next++;
    res.labels[i] = id;
    std::deque<std::size_t> seeds(nb.begin(), nb.end());
    while (!seeds.empty()) {
      auto j = seeds.front();
      seeds.pop_front();
      if (res.labels[j] == kNoise) res.labels[j] = id;  // border point
      if (res.labels[j] != kUnvisited) continue;
      res.labels[j] = id;
      auto nj = neighbours(j);
      if (nj.size() >= p.min_pts) seeds.insert(seeds.end(), nj.begin(), nj.end());
    }
  }
  res.clusters.resize(static_cast<std::size_t>(next));
  for (std::size_t i = 0; i < n; ++i)
    if (res.labels[i] >= 0) res.clusters[static_cast<std::size_t>(res.labels[i])].points.push_back(pts[i]);
  for (auto& c : res.clusters) c.update_centroid();
  return res;
}

/// Repeatedly merges the first pair (in index order) whose centroids are
/// within both bounds, until no pair qualifies.
inline std::vector<Cluster> fuse_clusters(std::vector<Cluster> clusters, double max_merge_dist, double max_merge_dt) {
  for (bool merged = true; merged;) {
    merged = false;
    for (std::size_t i = 0; i < clusters.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < clusters.size() && !merged; ++j) {
        const auto& a = clusters[i];
        const auto& b = clusters[j];
        if ((a.centroid - b.centroid).norm() <= max_merge_dist && std::abs(a.t_centroid - b.t_centroid) <= max_merge_dt) {
          clusters[i].points.insert(clusters[i].points.end(), b.points.begin(), b.points.end());
          clusters[i].update_centroid();
          clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(j));
          merged = true;
        }
      }
    }
  }
  return clusters;
}

}  // namespace crossmatch
