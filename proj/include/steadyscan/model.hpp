#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "steadyscan/box.hpp"
#include "steadyscan/expr.hpp"

namespace steadyscan {

enum class Scale { Linear, Log };

struct UnknownDecl {
  std::string name;
  Interval domain;
  Scale scale = Scale::Linear;
  bool reconstructed = false;
};

enum class Relation { Eq, Lt, Le, Gt, Ge, In };

const char* to_string(Relation r);
bool is_inequality(Relation r);

struct Constraint {
  std::string id;
  Expr lhs;
  Relation relation = Relation::Eq;
  Expr rhs;        // unused for Relation::In
  Interval range;  // only for Relation::In
  std::set<std::string> tags;
  /// Empty unless tagged `reliability=<level>`.
  std::string reliability;
  /// Produced by derive-steady-state rather than written in the file.
  bool generated = false;

  bool has_tag(const std::string& t) const { return tags.count(t) > 0; }
  bool is_redundant() const { return has_tag("redundant"); }
  /// Sorted unknown indices of lhs and rhs.
  std::vector<int> unknowns() const;
};

/// A rule attached to a constraint: an implied sum bound (documented in the
/// model file) from which add_redundant derives per-term checks.
struct RedundancyRule {
  std::string source_id;
  Expr sum;
  Relation relation = Relation::Lt;
  double bound = 0.0;
};

struct Event {
  std::string label;
  Expr time;
  std::vector<std::pair<int, Expr>> assignments;  // unknown index -> value
};

/// A parsed, fully resolved model. Immutable after construction.
struct Model {
  std::string name;
  std::vector<UnknownDecl> unknowns;
  std::vector<std::string> states;
  std::vector<Expr> odes;  // indexed like states
  std::vector<bool> ode_reconstructed;
  std::vector<Constraint> constraints;
  std::vector<RedundancyRule> redundancy_rules;
  std::vector<Event> events;
  std::string stl_spec;
  std::map<std::string, double> options;
  bool derive_steady_state = false;

  static constexpr const char* kSteadySuffix = "_eq";

  SpacePtr space() const;
  Box domain_box() const;

  std::optional<int> unknown_index(const std::string& name) const;
  std::optional<int> state_index(const std::string& name) const;
  /// Index of the unknown holding state s at steady state.
  std::optional<int> steady_unknown(int state) const;
  bool is_steady_unknown(int unknown) const;
  /// Unknowns that are not steady-state concentrations.
  std::vector<int> parameters() const;

  const Constraint* find_constraint(const std::string& id) const;
  double option(const std::string& key, double fallback) const;

  /// Cache of the space; filled by finalize().
  SpacePtr space_;
  void finalize();
};

bool structurally_equal(const Model& a, const Model& b);

}  // namespace steadyscan
