#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "crossmatch/core/error.hpp"
#include "crossmatch/core/hypothesis.hpp"
#include "crossmatch/matching/activation_matrix.hpp"
#include "crossmatch/matching/distance.hpp"
#include "crossmatch/sim/library.hpp"

namespace crossmatch {

struct MatchOptions {
  double min_overlap = 1.0;  // fraction of the shorter matrix that must overlap
};

enum class MatchStatus { matched, no_compatible_simulation };

struct ScoredHypothesis {
  Hypothesis hypothesis;
  MatchScore score;
};

struct MatchOutcome {
  MatchStatus status = MatchStatus::no_compatible_simulation;
  std::size_t h_red_size = 0;
  std::vector<ScoredHypothesis> scores;  // every record of D_red, library order
  HypothesisSet h_final{Provenance::final};
  std::uint64_t min_sdist = 0;
};

/// Scores an event matrix against every record compatible with `h_real` and
/// keeps the hypotheses that reach the minimum dissimilarity. Records carry
/// fully specified hypotheses, so H~ fills every field the inverse pass left
/// open, down to the concrete object type.
inline MatchOutcome match(const BinaryActivationMatrix& event_matrix, const HypothesisSet& h_real,
                          const SimulationLibrary& lib, const MatchTolerances& tol, const MatchOptions& opt = {}) {
  require(!lib.records.empty(), "simulation library is empty");
  require(std::abs(event_matrix.dt() - lib.dt()) <= 1e-12 * std::max(1.0, lib.dt()),
          "event matrix dt does not match the library dt");
  MatchOutcome out;
  auto h_red = intersect_hypotheses(lib.hypotheses(), h_real, tol);
  out.h_red_size = h_red.size();
  if (h_red.empty()) return out;
  out.status = MatchStatus::matched;
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  for (const auto& rec : lib.records) {
    if (!h_red.contains(rec.hypothesis)) continue;
    auto s = score_pair(event_matrix, rec.activation, opt.min_overlap);
    s.simulation_id = rec.id;
    best = std::min(best, s.sdist);
    out.scores.push_back({rec.hypothesis, s});
  }
  out.min_sdist = best;
  for (const auto& s : out.scores)
    if (s.score.sdist == best) out.h_final.insert(s.hypothesis);
  return out;
}

inline MatchOutcome match(const Event& event, const HypothesisSet& h_real, const SimulationLibrary& lib,
                          const MatchTolerances& tol, const MatchOptions& opt = {}) {
  return match(binarize(event, lib.field, lib.dt()), h_real, lib, tol, opt);
}

}  // namespace crossmatch
