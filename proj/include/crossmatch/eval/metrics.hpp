#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "crossmatch/core/error.hpp"

namespace crossmatch {

inline constexpr const char* kUnknownLabel = "Unknown";

struct LabeledPrediction {
  std::vector<std::string> predicted;  // tied labels of H~; empty = Unknown
  std::string truth;
};

struct ClassMetrics {
  std::size_t tp = 0, fp = 0, fn = 0, support = 0;
  double precision = 0, recall = 0, f1 = 0;
};

struct RankHistogram {
  std::map<std::size_t, std::size_t> counts;  // rank -> events
  std::size_t absent = 0;

  std::size_t total() const {
    std::size_t n = absent;
    for (const auto& [r, c] : counts) n += c;
    return n;
  }
  double fraction_at_most(std::size_t rank) const {
    std::size_t n = 0;
    for (const auto& [r, c] : counts)
      if (r <= rank) n += c;
    return total() ? static_cast<double>(n) / static_cast<double>(total()) : 0.0;
  }
};

struct EvalReport {
  std::string level;
  std::size_t examples = 0;
  std::size_t tie_resolutions = 0;  // predictions that had to pick among tied labels
  std::map<std::string, ClassMetrics> per_class;
  std::map<std::pair<std::string, std::string>, std::size_t> confusion;  // (truth, predicted)
  double precision = 0, recall = 0, f1 = 0;  // support-weighted macro averages
  double accuracy = 0;
  RankHistogram ranks;
};

// Single label for a possibly tied prediction: the lexicographically smallest.
inline std::string resolve_prediction(const std::vector<std::string>& labels) {
  if (labels.empty()) return kUnknownLabel;
  return *std::min_element(labels.begin(), labels.end());
}

/// Per-class precision/recall/F1 from the confusion counts and their
/// support-weighted means. Classes never predicted score precision 0.
inline EvalReport classification_metrics(const std::vector<LabeledPrediction>& predictions, std::string level = "") {
  require(!predictions.empty(), "classification_metrics needs at least one labelled example");
  EvalReport rep;
  rep.level = std::move(level);
  rep.examples = predictions.size();
  std::size_t correct = 0;
  for (const auto& p : predictions) {
    std::set<std::string> distinct(p.predicted.begin(), p.predicted.end());
    if (distinct.size() > 1) ++rep.tie_resolutions;
    auto pred = resolve_prediction(p.predicted);
    ++rep.confusion[{p.truth, pred}];
    auto& t = rep.per_class[p.truth];
    ++t.support;
    if (pred == p.truth) {
      ++t.tp;
      ++correct;
    } else {
      ++t.fn;
      ++rep.per_class[pred].fp;
    }
  }
  const double n = static_cast<double>(predictions.size());
  for (auto& [label, m] : rep.per_class) {
    m.precision = m.tp + m.fp ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
    m.recall = m.tp + m.fn ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    double w = static_cast<double>(m.support) / n;
    rep.precision += w * m.precision;
    rep.recall += w * m.recall;
    rep.f1 += w * m.f1;
  }
  rep.accuracy = static_cast<double>(correct) / n;
  return rep;
}

inline RankHistogram rank_histogram(const std::vector<std::optional<std::size_t>>& ranks) {
  RankHistogram h;
  for (const auto& r : ranks) {
    if (r)
      ++h.counts[*r];
    else
      ++h.absent;
  }
  return h;
}

}  // namespace crossmatch
