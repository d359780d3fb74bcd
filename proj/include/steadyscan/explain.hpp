#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "steadyscan/model.hpp"
#include "steadyscan/propagate.hpp"
#include "steadyscan/stats.hpp"

namespace steadyscan {

struct ExplainOptions {
  std::size_t max_sets = 32;
  /// Inner consistency checks run at this tolerance; a non-empty answer is
  /// confirmed at `tol`.
  double coarse_tol = 1e-2;
  double tol = kDefaultPropagateTol;
};

struct ConflictReport {
  /// False when the constraints propagate to the empty box.
  bool consistent = true;
  /// Smallest sets of constraint ids whose removal makes propagation
  /// non-empty. All sets have the same (minimum) size; ids inside a set and
  /// the sets themselves are sorted lexicographically.
  std::vector<std::vector<std::string>> minimal_sets;
  /// Per constraint: number of consistency tests it took part in, and how
  /// often its revise was the one that emptied the box.
  ConstraintStats stats;
  bool truncated = false;
  std::size_t consistency_checks = 0;
};

/// Consistency as the search sees it: coarse propagation proves emptiness,
/// a non-empty coarse result is re-checked at full tolerance.
class ConsistencyOracle {
public:
  ConsistencyOracle(const std::vector<Constraint>& cs, const Box& b, const ExplainOptions& opt = {});

  /// `keep[i]` selects constraint i.
  bool consistent(const std::vector<bool>& keep);
  std::size_t checks() const { return checks_; }
  const ConstraintStats& stats() const { return stats_; }

private:
  const std::vector<Constraint>& cs_;
  Box box_;
  ConstraintSystem sys_;
  ExplainOptions opt_;
  std::size_t checks_ = 0;
  ConstraintStats stats_;
};

ConflictReport min_conflict_sets(const std::vector<Constraint>& cs, const Box& b, const ExplainOptions& opt = {});
ConflictReport min_conflict_sets(const std::vector<Constraint>& cs, const Box& b, std::size_t max_sets);

struct RankedConstraint {
  std::string id;
  std::uint64_t checked = 0;
  std::uint64_t violated = 0;
  /// violated / checked; empty when never checked.
  std::optional<double> rate;
};

/// Ids by violation rate descending, ties by checked count descending, then
/// by id. Ids in `all_ids` missing from the stats (or never checked) come
/// last, in the given order, with no rate.
std::vector<RankedConstraint> difficulty_ranking(const ConstraintStats& stats,
                                                 const std::vector<std::string>& all_ids = {});

nlohmann::ordered_json to_json(const ConflictReport& r);
/// Human-readable table; reliability tags are looked up in `cs`.
std::string render_report(const ConflictReport& r, const std::vector<Constraint>& cs);

}  // namespace steadyscan
