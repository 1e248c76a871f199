#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "crossmatch/core/error.hpp"

namespace crossmatch {

// Crossing direction along the primary line axis: `right` moves towards
// increasing line coordinate, `left` towards decreasing.
enum class Direction { right, left };

inline const char* to_string(Direction d) { return d == Direction::right ? "right" : "left"; }

inline Direction parse_direction(const std::string& s) {
  if (s == "right") return Direction::right;
  if (s == "left") return Direction::left;
  throw ValidationError("unknown direction '" + s + "'");
}

inline int sign(Direction d) { return d == Direction::right ? 1 : -1; }

// Empty optionals are wildcards throughout.
struct MotionVector {
  std::optional<Direction> direction;
  std::optional<double> velocity;  // m/s
  std::optional<double> angle;     // degrees, heading deviation from the primary axis

  bool fully_specified() const { return direction && velocity && angle; }
  bool all_wildcard() const { return !direction && !velocity && !angle; }
  bool operator==(const MotionVector&) const = default;

  void validate() const {
    if (velocity) require(std::isfinite(*velocity) && *velocity > 0.0, "velocity must be positive");
    if (angle) require(std::isfinite(*angle) && *angle >= -90.0 && *angle < 90.0, "angle must lie in [-90, 90)");
  }
};

struct ObjectLabel {
  std::optional<std::string> object_type;
  std::optional<std::string> category;

  bool operator==(const ObjectLabel&) const = default;
};

struct Hypothesis {
  ObjectLabel label;
  MotionVector motion;

  bool fully_specified() const {
    return label.object_type && label.category && motion.fully_specified();
  }
  bool operator==(const Hypothesis&) const = default;
};

inline bool operator<(const Hypothesis& a, const Hypothesis& b) {
  auto key = [](const Hypothesis& h) {
    return std::tuple(h.label.object_type, h.label.category, h.motion.direction, h.motion.velocity,
                      h.motion.angle);
  };
  return key(a) < key(b);
}

struct MatchTolerances {
  double velocity = 0.0;  // m/s
  double angle = 0.0;     // degrees
};

enum class Provenance { initial, inverse, simulated, reduced, final };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::initial: return "initial";
    case Provenance::inverse: return "inverse";
    case Provenance::simulated: return "simulated";
    case Provenance::reduced: return "reduced";
    case Provenance::final: return "final";
  }
  return "?";
}

/// Ordered collection with set semantics: inserting an equal hypothesis is a
/// no-op. Insertion order is preserved so that outputs stay deterministic.
class HypothesisSet {
public:
  HypothesisSet() = default;
  explicit HypothesisSet(Provenance p) : provenance_(p) {}
  HypothesisSet(Provenance p, const std::vector<Hypothesis>& hs) : provenance_(p) {
    for (const auto& h : hs) insert(h);
  }

  bool insert(const Hypothesis& h) {
    if (contains(h)) return false;
    items_.push_back(h);
    return true;
  }
  bool contains(const Hypothesis& h) const {
    return std::find(items_.begin(), items_.end(), h) != items_.end();
  }

  Provenance provenance() const { return provenance_; }
  void set_provenance(Provenance p) { provenance_ = p; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const std::vector<Hypothesis>& items() const { return items_; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

private:
  Provenance provenance_ = Provenance::initial;
  std::vector<Hypothesis> items_;
};

namespace detail {
inline constexpr double kTolSlack = 1e-9;

inline bool within(double a, double b, double tol) { return std::abs(a - b) <= tol + kTolSlack; }
}  // namespace detail

// True iff every concrete field of `pattern` agrees with `concrete`.
// Direction and labels compare exactly; velocity and angle within `tol`.
inline bool hypothesis_matches(const Hypothesis& concrete, const Hypothesis& pattern,
                               const MatchTolerances& tol) {
  const auto& pl = pattern.label;
  const auto& pm = pattern.motion;
  if (pl.object_type && pl.object_type != concrete.label.object_type) return false;
  if (pl.category && pl.category != concrete.label.category) return false;
  if (pm.direction && pm.direction != concrete.motion.direction) return false;
  if (pm.velocity && !(concrete.motion.velocity && detail::within(*concrete.motion.velocity, *pm.velocity, tol.velocity)))
    return false;
  if (pm.angle && !(concrete.motion.angle && detail::within(*concrete.motion.angle, *pm.angle, tol.angle)))
    return false;
  return true;
}

// Simulated hypotheses compatible with at least one inverse pattern. An empty
// `real` set carries no constraint and keeps all of `sim`.
inline HypothesisSet intersect_hypotheses(const HypothesisSet& sim, const HypothesisSet& real,
                                          const MatchTolerances& tol) {
  HypothesisSet out(Provenance::reduced);
  for (const auto& h : sim) {
    require(h.fully_specified(), "simulation hypotheses must be fully specified");
    bool keep = real.empty() || std::any_of(real.begin(), real.end(), [&](const Hypothesis& p) {
                  return hypothesis_matches(h, p, tol);
                });
    if (keep) out.insert(h);
  }
  return out;
}

}  // namespace crossmatch
