#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "steadyscan/assignment.hpp"
#include "steadyscan/model.hpp"
#include "steadyscan/stats.hpp"

namespace steadyscan {

/// Bipartite graph between constraints and the unknowns still unassigned.
struct DependencyGraph {
  struct Component {
    std::vector<std::size_t> constraints;  // indices into the constraint list
    std::vector<int> unknowns;             // unassigned unknown indices
  };
  std::vector<Component> components;
  /// Constraints whose references are all assigned: checkable now.
  std::vector<std::size_t> checkable;
  /// For each constraint, its unassigned unknowns.
  std::vector<std::vector<int>> open_refs;
};

/// `skip[i]` leaves constraint i out of the graph entirely (used for
/// closing equations, whose output appears nowhere else).
DependencyGraph dependency_graph(const std::vector<Constraint>& cs, std::size_t n_unknowns,
                                 const std::vector<bool>& assigned, const std::vector<bool>& skip = {});
DependencyGraph dependency_graph(const std::vector<Constraint>& cs, const SpacePtr& space,
                                 const std::set<std::string>& assigned);

/// Number of components left after removing u together with every unknown
/// that touches exactly the same constraints.
std::size_t articulation_score(const DependencyGraph& g, int u);

/// Which unknown each equality is solved for. Built by repeatedly taking an
/// unknown that occurs, solvably, in exactly one remaining equality.
struct DeductionPlan {
  std::map<std::size_t, int> output;  // equality index -> unknown
  std::vector<bool> is_output;        // per unknown
  /// Equalities whose output occurs in no other constraint; they close the
  /// system and are left out of the decomposition graph.
  std::vector<bool> closing;
};

DeductionPlan plan_deductions(const std::vector<Constraint>& cs, const std::vector<UnknownDecl>& unknowns,
                              const Box& hull, const std::vector<bool>& assigned = {});

/// Unknowns to sample, ordered by ascending relative width, then descending
/// articulation score, then declaration order. Unknowns the plan deduces
/// and those already assigned are left out.
std::vector<std::string> select_sampling_set(const DependencyGraph& g, const std::vector<Constraint>& cs,
                                             const std::vector<UnknownDecl>& unknowns, const BoxUnion& u,
                                             const std::vector<bool>& assigned = {});

/// Thrown by deduce when a deduced value leaves its interval.
class DomainViolation : public Error {
public:
  DomainViolation(std::string name, double value, Interval domain);
  const std::string& name() const { return name_; }
  double value() const { return value_; }
  const Interval& domain() const { return domain_; }

private:
  std::string name_;
  double value_;
  Interval domain_;
};

/// Solves, to a fixpoint, every equality with exactly one unassigned unknown
/// occurring linearly or as an isolated integer power. `domains` (box over
/// the same space) bounds the deduced values. Returns the new assignment.
Assignment deduce(const Assignment& a, const std::vector<Constraint>& equalities, const Box& domains);

struct CheckResult {
  bool pass = true;
  std::vector<std::string> failed;
};

/// Evaluates each constraint whose references are all assigned, counting
/// into `stats` when given. Equalities use the residual tolerance.
CheckResult early_check(const Assignment& a, const std::vector<Constraint>& cs, ConstraintStats* stats = nullptr);

/// Residual tolerance for equalities.
constexpr double kResidualRtol = 1e-9;
constexpr double kResidualAtol = 1e-20;

/// lhs - rhs for equalities (0 is exact), otherwise the signed margin
/// (positive when satisfied).
double slack(const Constraint& c, const Assignment& a);
/// Scale used by the residual tolerance: max(|rhs|, largest additive term).
double residual_scale(const Constraint& c, const Assignment& a);
bool holds(const Constraint& c, const Assignment& a);

/// Per-term bounds implied by sum bounds over nonnegative terms: from the
/// constraints themselves (sum < U, sum in [L, U]) and from the rules
/// attached to them. Terms must be nonnegative on `b`. Results are tagged
/// redundant; the inputs are untouched.
std::vector<Constraint> add_redundant(const std::vector<Constraint>& cs, const std::vector<RedundancyRule>& rules,
                                      const Box& b);

struct Solution {
  std::uint64_t attempt = 0;
  Assignment assignment;
  std::vector<std::pair<std::string, double>> residuals;  // constraint id -> slack
};

struct SubproblemCounter {
  std::uint64_t attempts = 0;
  std::uint64_t successes = 0;
};

struct SearchStats {
  ConstraintStats constraints;
  /// Domain checks of deduced values, keyed by unknown name.
  ConstraintStats domains;
  /// Conditional contraction emptied the box; keyed by the constraint that
  /// failed.
  std::map<std::string, std::uint64_t> pruned;
  std::map<std::string, SubproblemCounter> subproblems;
  std::uint64_t attempts = 0;
  /// One per (sub)problem instantiation; equals the sum of subproblem
  /// attempts.
  std::uint64_t samples_drawn = 0;
  std::uint64_t values_drawn = 0;
  std::uint64_t solutions = 0;
  double wall_seconds = 0.0;

  void merge(const SearchStats& o);
};

struct SamplerOptions {
  std::uint64_t seed = 0;
  std::size_t target = 1000;
  std::size_t budget = 100000;  // top-level attempts
  int jobs = 1;
  /// Propagate with the values drawn so far before each draw.
  bool conditional = true;
  bool use_redundant = true;
  /// Decompose into independent sub-problems and retry them separately.
  bool decompose = true;
  int retries = 8;
  double tol = 1e-3;
};

struct SampleResult {
  std::vector<Solution> solutions;
  SearchStats stats;
  bool budget_exhausted = false;
  std::vector<std::string> sampling_order;
};

SampleResult sample_steady_states(const Model& m, const BoxUnion& u, const SamplerOptions& opt);

/// Independent re-check of a total assignment against every non-redundant
/// constraint of m and the model domains. Returns the failed ids.
std::vector<std::string> verify(const Model& m, const Assignment& a);

nlohmann::ordered_json to_json(const Solution& s);
Solution solution_from_json(const nlohmann::ordered_json& j, const Model& m);
nlohmann::ordered_json to_json(const SearchStats& s);
void write_solutions(std::ostream& os, const std::vector<Solution>& sols);
std::vector<Solution> read_solutions(std::istream& is, const Model& m);

}  // namespace steadyscan
