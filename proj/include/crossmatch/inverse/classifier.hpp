#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crossmatch/core/error.hpp"
#include "crossmatch/core/sensor_field.hpp"
#include "crossmatch/core/taxonomy.hpp"
#include "crossmatch/detection/events.hpp"
#include "crossmatch/matching/activation_matrix.hpp"

namespace crossmatch {

struct Classification {
  std::optional<std::string> category;
  double confidence = 0.0;
};

// Category model used by the inverse pass. Implementations may be learned or
// rule based; they only need to declare which categories they can emit.
class Classifier {
public:
  virtual ~Classifier() = default;
  virtual std::set<std::string> categories() const = 0;
  virtual Classification predict(const Event& event, const SensorField& field) const = 0;
};

/// Runs `model` and maps low-confidence answers to a wildcard. Throws when
/// the model speaks categories the taxonomy does not know.
inline std::optional<std::string> classify(const Event& event, const SensorField& field, const Classifier& model,
                                           const Taxonomy& taxonomy, double confidence_floor = 0.5) {
  auto known = taxonomy.categories();
  for (const auto& c : model.categories())
    require(known.count(c) == 1, "classifier category '" + c + "' is not in taxonomy scheme '" +
                                     taxonomy.category_scheme() + "'");
  auto r = model.predict(event, field);
  if (!r.category || r.confidence < confidence_floor) return std::nullopt;
  return r.category;
}

// Lateral extent (m) between the outermost activated sensors of the
// perpendicular line; empty when none of them fired.
inline std::optional<double> footprint_span(const std::set<std::size_t>& active_columns, const SensorField& field) {
  auto lat = field.lateral_axis();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (auto c : field.perpendicular_line().members) {
    if (!active_columns.count(c)) continue;
    double w = lat.coordinate(field.sensor(c).position);
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  if (lo > hi) return std::nullopt;
  return hi - lo;
}

inline std::set<std::size_t> active_columns(const Event& e) {
  std::set<std::size_t> s;
  for (const auto& f : e.frames) s.insert(f.active.begin(), f.active.end());
  return s;
}

inline std::set<std::size_t> active_columns(const BinaryActivationMatrix& m) {
  std::set<std::size_t> s;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (m.get(r, c)) s.insert(c);
  return s;
}

struct SpanBin {
  std::string category;
  double lo = 0.0;
  double hi = 0.0;
};

/// Geometric baseline: bins the perpendicular-line footprint span. A span
/// inside k overlapping bins picks the bin with the nearest centre and
/// reports confidence 1/k; outside every bin it abstains.
class SpanBinClassifier : public Classifier {
public:
  explicit SpanBinClassifier(std::vector<SpanBin> bins) : bins_(std::move(bins)) {
    for (const auto& b : bins_) require(b.lo <= b.hi, "span bin '" + b.category + "' has lo > hi");
  }

  // Per-category [min, max] span over a set of labelled activation matrices,
  // widened by `margin` metres on both sides.
  template <typename Records>
  static SpanBinClassifier calibrate(const Records& records, const SensorField& field, double margin = 0.0) {
    std::map<std::string, SpanBin> bins;
    for (const auto& r : records) {
      auto span = footprint_span(active_columns(r.activation), field);
      if (!span || !r.hypothesis.label.category) continue;
      const auto& cat = *r.hypothesis.label.category;
      auto [it, fresh] = bins.try_emplace(cat, SpanBin{cat, *span, *span});
      it->second.lo = std::min(it->second.lo, *span);
      it->second.hi = std::max(it->second.hi, *span);
    }
    std::vector<SpanBin> out;
    for (auto& [c, b] : bins) out.push_back({b.category, b.lo - margin, b.hi + margin});
    return SpanBinClassifier(std::move(out));
  }

  const std::vector<SpanBin>& bins() const { return bins_; }

  std::set<std::string> categories() const override {
    std::set<std::string> s;
    for (const auto& b : bins_) s.insert(b.category);
    return s;
  }

  Classification predict_span(std::optional<double> span) const {
    if (!span) return {};
    const SpanBin* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    int hits = 0;
    for (const auto& b : bins_) {
      if (*span < b.lo - 1e-9 || *span > b.hi + 1e-9) continue;
      ++hits;
      double d = std::abs(*span - 0.5 * (b.lo + b.hi));
      if (d < best_d || (d == best_d && b.category < best->category)) {
        best = &b;
        best_d = d;
      }
    }
    if (!best) return {};
    return {best->category, 1.0 / hits};
  }

  Classification predict(const Event& event, const SensorField& field) const override {
    return predict_span(footprint_span(active_columns(event), field));
  }

private:
  std::vector<SpanBin> bins_;
};

}  // namespace crossmatch
