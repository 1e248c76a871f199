#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crossmatch/core/error.hpp"
#include "crossmatch/core/taxonomy.hpp"
#include "crossmatch/matching/match.hpp"

namespace crossmatch {

struct DissimilarityGroup {
  std::uint64_t sdist = 0;
  std::vector<ScoredHypothesis> members;  // sorted by simulation id
};

// Groups of equal dissimilarity in ascending order; rank = index + 1.
struct GroupRanking {
  std::vector<DissimilarityGroup> groups;

  std::size_t rank_of_group(std::size_t index) const { return index + 1; }
};

inline GroupRanking group_ranks(const std::vector<ScoredHypothesis>& scores) {
  std::map<std::uint64_t, std::vector<ScoredHypothesis>> by;
  for (const auto& s : scores) by[s.score.sdist].push_back(s);
  GroupRanking g;
  for (auto& [d, members] : by) {
    std::sort(members.begin(), members.end(), [](const auto& a, const auto& b) {
      return a.score.simulation_id < b.score.simulation_id;
    });
    g.groups.push_back({d, std::move(members)});
  }
  return g;
}

// Label of `truth` at a taxonomy level; the type level needs a concrete type,
// other levels fall back to the stored category for the active scheme.
inline std::optional<std::string> label_at_level(const ObjectLabel& label, const std::string& level,
                                                 const Taxonomy& taxonomy) {
  if (!taxonomy.has_level(level)) throw ValidationError("unknown taxonomy level '" + level + "'");
  if (label.object_type) {
    auto l = taxonomy.label_at(*label.object_type, level);
    if (l) return l;
  }
  if (level == taxonomy.category_scheme()) return label.category;
  return std::nullopt;
}

/// Smallest rank whose group holds a simulation agreeing with `truth` at
/// `level`; empty if no group does.
inline std::optional<std::size_t> true_class_rank(const GroupRanking& ranking, const ObjectLabel& truth,
                                                  const std::string& level, const Taxonomy& taxonomy) {
  auto want = label_at_level(truth, level, taxonomy);
  if (!want) return std::nullopt;
  for (std::size_t i = 0; i < ranking.groups.size(); ++i)
    for (const auto& m : ranking.groups[i].members)
      if (label_at_level(m.hypothesis.label, level, taxonomy) == want) return ranking.rank_of_group(i);
  return std::nullopt;
}

}  // namespace crossmatch
