#include "steadyscan/model.hpp"

#include <algorithm>

namespace steadyscan {

const char* to_string(Relation r) {
  switch (r) {
    case Relation::Eq: return "=";
    case Relation::Lt: return "<";
    case Relation::Le: return "<=";
    case Relation::Gt: return ">";
    case Relation::Ge: return ">=";
    case Relation::In: return "in";
  }
  return "?";
}

bool is_inequality(Relation r) { return r != Relation::Eq; }

std::vector<int> Constraint::unknowns() const {
  std::vector<int> out = unknown_refs(lhs);
  if (relation != Relation::In) {
    auto r = unknown_refs(rhs);
    out.insert(out.end(), r.begin(), r.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

void Model::finalize() {
  std::vector<std::string> names;
  names.reserve(unknowns.size());
  for (const auto& u : unknowns) names.push_back(u.name);
  space_ = make_space(std::move(names));
}

SpacePtr Model::space() const {
  if (space_) return space_;
  std::vector<std::string> names;
  for (const auto& u : unknowns) names.push_back(u.name);
  return make_space(std::move(names));
}

Box Model::domain_box() const {
  std::vector<Interval> dims;
  dims.reserve(unknowns.size());
  for (const auto& u : unknowns) dims.push_back(u.domain);
  return {space(), std::move(dims)};
}

std::optional<int> Model::unknown_index(const std::string& n) const {
  for (std::size_t i = 0; i < unknowns.size(); ++i) {
    if (unknowns[i].name == n) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::optional<int> Model::state_index(const std::string& n) const {
  auto it = std::find(states.begin(), states.end(), n);
  if (it == states.end()) return std::nullopt;
  return static_cast<int>(it - states.begin());
}

std::optional<int> Model::steady_unknown(int state) const {
  return unknown_index(states.at(static_cast<std::size_t>(state)) + kSteadySuffix);
}

bool Model::is_steady_unknown(int unknown) const {
  const std::string& n = unknowns.at(static_cast<std::size_t>(unknown)).name;
  const std::string suffix = kSteadySuffix;
  if (n.size() <= suffix.size() || n.compare(n.size() - suffix.size(), suffix.size(), suffix) != 0) return false;
  return state_index(n.substr(0, n.size() - suffix.size())).has_value();
}

std::vector<int> Model::parameters() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(unknowns.size()); ++i) {
    if (!is_steady_unknown(i)) out.push_back(i);
  }
  return out;
}

const Constraint* Model::find_constraint(const std::string& id) const {
  for (const auto& c : constraints) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

double Model::option(const std::string& key, double fallback) const {
  auto it = options.find(key);
  return it == options.end() ? fallback : it->second;
}

namespace {

bool equal_constraint(const Constraint& a, const Constraint& b) {
  if (a.id != b.id || a.relation != b.relation || a.tags != b.tags || a.reliability != b.reliability ||
      a.generated != b.generated)
    return false;
  if (!structurally_equal(a.lhs, b.lhs)) return false;
  if (a.relation == Relation::In) return a.range == b.range;
  return structurally_equal(a.rhs, b.rhs);
}

}  // namespace

bool structurally_equal(const Model& a, const Model& b) {
  if (a.name != b.name || a.states != b.states || a.stl_spec != b.stl_spec || a.options != b.options ||
      a.derive_steady_state != b.derive_steady_state || a.ode_reconstructed != b.ode_reconstructed)
    return false;
  if (a.unknowns.size() != b.unknowns.size() || a.odes.size() != b.odes.size() ||
      a.constraints.size() != b.constraints.size() || a.events.size() != b.events.size() ||
      a.redundancy_rules.size() != b.redundancy_rules.size())
    return false;
  for (std::size_t i = 0; i < a.unknowns.size(); ++i) {
    const auto& x = a.unknowns[i];
    const auto& y = b.unknowns[i];
    if (x.name != y.name || !(x.domain == y.domain) || x.scale != y.scale || x.reconstructed != y.reconstructed)
      return false;
  }
  for (std::size_t i = 0; i < a.odes.size(); ++i) {
    if (!structurally_equal(a.odes[i], b.odes[i])) return false;
  }
  for (std::size_t i = 0; i < a.constraints.size(); ++i) {
    if (!equal_constraint(a.constraints[i], b.constraints[i])) return false;
  }
  for (std::size_t i = 0; i < a.redundancy_rules.size(); ++i) {
    const auto& x = a.redundancy_rules[i];
    const auto& y = b.redundancy_rules[i];
    if (x.source_id != y.source_id || x.relation != y.relation || x.bound != y.bound || !structurally_equal(x.sum, y.sum))
      return false;
  }
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    const auto& x = a.events[i];
    const auto& y = b.events[i];
    if (x.label != y.label || !structurally_equal(x.time, y.time) || x.assignments.size() != y.assignments.size())
      return false;
    for (std::size_t k = 0; k < x.assignments.size(); ++k) {
      if (x.assignments[k].first != y.assignments[k].first ||
          !structurally_equal(x.assignments[k].second, y.assignments[k].second))
        return false;
    }
  }
  return true;
}

}  // namespace steadyscan
