#pragma once

#include <cmath>
#include <cstddef>
#include <deque>

#include "crossmatch/core/error.hpp"
#include "crossmatch/core/geometry.hpp"

namespace crossmatch {

struct DetectorConfig {
  std::size_t lag = 50;
  double z_threshold = 3.5;
  double influence = 0.1;
  double min_gap = 1.0;  // seconds of field-wide silence that ends an event

  void validate() const {
    require(lag >= 2, "detector lag must be at least 2");
    require(std::isfinite(z_threshold) && z_threshold > 0, "z_threshold must be positive");
    require(influence >= 0.0 && influence <= 1.0, "influence must lie in [0, 1]");
    require(std::isfinite(min_gap) && min_gap >= 0.0, "min_gap must be non-negative");
  }

  bool operator==(const DetectorConfig&) const = default;
};

inline constexpr double kSigmaFloor = 1e-9;

// Rolling statistics of one sensor. `window` holds the last `lag` filtered
// samples; flagged samples enter it blended with the previous filtered value.
struct DetectorState {
  std::deque<Vec3> window;

  bool warmed_up(const DetectorConfig& cfg) const { return window.size() >= cfg.lag; }

  Vec3 mean() const {
    Vec3 m;
    for (const auto& v : window) {
      m.x += v.x;
      m.y += v.y;
      m.z += v.z;
    }
    double n = static_cast<double>(window.size());
    return {m.x / n, m.y / n, m.z / n};
  }

  // Standard deviation of the vector samples about their mean, i.e. the RMS
  // length of the deviation vectors.
  double stddev(const Vec3& mu) const {
    double acc = 0;
    for (const auto& v : window) {
      Vec3 d = v - mu;
      acc += d.x * d.x + d.y * d.y + d.z * d.z;
    }
    return std::sqrt(acc / static_cast<double>(window.size()));
  }
};

struct Activation {
  bool active = false;
  double magnitude = 0.0;  // |value - rolling mean|
  double threshold = 0.0;
};

/// Feeds one sample into a sensor's rolling detector. The first `lag` samples
/// only seed the window and are never flagged.
inline Activation update_threshold(DetectorState& state, const Vec3& value, const DetectorConfig& cfg) {
  if (!(std::isfinite(value.x) && std::isfinite(value.y) && std::isfinite(value.z)))
    throw ValidationError("non-finite reading");
  if (!state.warmed_up(cfg)) {
    Activation a;
    if (!state.window.empty()) a.magnitude = (value - state.mean()).norm();
    state.window.push_back(value);
    return a;
  }
  Vec3 mu = state.mean();
  double sigma = std::max(state.stddev(mu), kSigmaFloor);
  Activation a;
  a.magnitude = (value - mu).norm();
  a.threshold = cfg.z_threshold * sigma;
  a.active = a.magnitude >= a.threshold;

  Vec3 filtered = value;
  if (a.active) {
    const Vec3& prev = state.window.back();
    double k = cfg.influence;
    filtered = {k * value.x + (1 - k) * prev.x, k * value.y + (1 - k) * prev.y,
                k * value.z + (1 - k) * prev.z};
  }
  state.window.pop_front();
  state.window.push_back(filtered);
  return a;
}

}  // namespace crossmatch
