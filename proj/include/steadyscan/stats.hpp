#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace steadyscan {

/// How often a constraint was evaluated and how often it failed.
struct ConstraintCounter {
  std::uint64_t checked = 0;
  std::uint64_t violated = 0;

  ConstraintCounter& operator+=(const ConstraintCounter& o) {
    checked += o.checked;
    violated += o.violated;
    return *this;
  }
};

using ConstraintStats = std::map<std::string, ConstraintCounter>;

inline void merge_into(ConstraintStats& into, const ConstraintStats& from) {
  for (const auto& [id, c] : from) into[id] += c;
}

}  // namespace steadyscan
