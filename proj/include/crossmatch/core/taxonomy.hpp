#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>

#include "crossmatch/core/error.hpp"
#include "crossmatch/core/hypothesis.hpp"

namespace crossmatch {

// Label taxonomy: one or more named schemes, each mapping object types to a
// coarser class. `category_scheme` names the scheme that ObjectLabel::category
// refers to. The pseudo-level "type" is the identity.
class Taxonomy {
public:
  static constexpr const char* kTypeLevel = "type";

  Taxonomy() = default;
  Taxonomy(std::string category_scheme, std::map<std::string, std::map<std::string, std::string>> schemes)
      : category_scheme_(std::move(category_scheme)), schemes_(std::move(schemes)) {
    require(schemes_.count(category_scheme_) == 1,
            "taxonomy has no scheme named '" + category_scheme_ + "'");
  }

  const std::string& category_scheme() const { return category_scheme_; }
  const auto& schemes() const { return schemes_; }

  bool has_level(const std::string& level) const {
    return level == kTypeLevel || schemes_.count(level) == 1;
  }

  std::optional<std::string> category_of(const std::string& type) const {
    return label_at(type, category_scheme_);
  }

  std::optional<std::string> label_at(const std::string& type, const std::string& level) const {
    if (level == kTypeLevel) return type;
    auto s = schemes_.find(level);
    if (s == schemes_.end()) throw ValidationError("unknown taxonomy level '" + level + "'");
    auto it = s->second.find(type);
    if (it == s->second.end()) return std::nullopt;
    return it->second;
  }

  std::set<std::string> categories() const {
    std::set<std::string> out;
    for (const auto& [t, c] : schemes_.at(category_scheme_)) out.insert(c);
    return out;
  }

  // Enforces: a concrete type implies the taxonomy's category for it.
  void validate(const ObjectLabel& label) const {
    if (!label.object_type) return;
    auto c = category_of(*label.object_type);
    require(c.has_value(), "type '" + *label.object_type + "' missing from taxonomy");
    require(!label.category || *label.category == *c,
            "type '" + *label.object_type + "' belongs to category '" + *c + "', not '" +
                label.category.value_or("") + "'");
  }

private:
  std::string category_scheme_;
  std::map<std::string, std::map<std::string, std::string>> schemes_;
};

}  // namespace crossmatch
