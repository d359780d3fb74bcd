#include "steadyscan/explain.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>

namespace steadyscan {

ConsistencyOracle::ConsistencyOracle(const std::vector<Constraint>& cs, const Box& b, const ExplainOptions& opt)
    : cs_(cs), box_(b), sys_(cs, b.space()), opt_(opt) {
  for (const auto& c : cs) stats_[c.id];
}

bool ConsistencyOracle::consistent(const std::vector<bool>& keep) {
  ++checks_;
  for (std::size_t i = 0; i < cs_.size(); ++i) {
    if (keep[i]) ++stats_[cs_[i].id].checked;
  }
  if (box_.is_empty()) return false;
  // no constraint selected: the box itself
  if (std::none_of(keep.begin(), keep.end(), [](bool k) { return k; })) return true;
  std::size_t failed = 0;
  std::vector<Interval> dims = box_.dims();
  if (!sys_.fixpoint(dims, opt_.coarse_tol, keep, &failed)) {
    ++stats_[cs_[failed].id].violated;
    return false;
  }
  dims = box_.dims();
  if (!sys_.fixpoint(dims, opt_.tol, keep, &failed)) {
    ++stats_[cs_[failed].id].violated;
    return false;
  }
  return true;
}

namespace {

class Search {
public:
  Search(const std::vector<Constraint>& cs, const Box& b, const ExplainOptions& opt)
      : m_(cs.size()), oracle_(cs, b, opt) {}

  bool consistent_without(const std::vector<std::size_t>& removed) {
    std::vector<bool> keep(m_, true);
    for (std::size_t i : removed) keep[i] = false;
    return cached(keep);
  }

  bool cached(const std::vector<bool>& keep) {
    auto it = cache_.find(keep);
    if (it != cache_.end()) return it->second;
    const bool ok = oracle_.consistent(keep);
    cache_.emplace(keep, ok);
    return ok;
  }

  bool consistent_subset(const std::vector<std::size_t>& subset) {
    std::vector<bool> keep(m_, false);
    for (std::size_t i : subset) keep[i] = true;
    return cached(keep);
  }

  // QuickXplain: a subset-minimal inconsistent subset of base + c, given that
  // base + c is inconsistent and base alone is consistent.
  std::vector<std::size_t> quickxplain(const std::vector<std::size_t>& base, bool delta_nonempty,
                                       const std::vector<std::size_t>& c) {
    if (delta_nonempty && !consistent_subset(base)) return {};
    if (c.size() == 1) return c;
    const std::size_t half = c.size() / 2;
    const std::vector<std::size_t> c1(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    const std::vector<std::size_t> c2(c.begin() + static_cast<std::ptrdiff_t>(half), c.end());
    std::vector<std::size_t> b1 = base;
    b1.insert(b1.end(), c1.begin(), c1.end());
    const auto d2 = quickxplain(b1, !c1.empty(), c2);
    std::vector<std::size_t> b2 = base;
    b2.insert(b2.end(), d2.begin(), d2.end());
    const auto d1 = quickxplain(b2, !d2.empty(), c1);
    std::vector<std::size_t> out = d1;
    out.insert(out.end(), d2.begin(), d2.end());
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<std::size_t> core_of(const std::vector<std::size_t>& inconsistent) {
    return quickxplain({}, false, inconsistent);
  }

  bool hits_all(const std::vector<std::size_t>& s) const {
    for (const auto& core : cores_) {
      bool hit = false;
      for (std::size_t i : s) {
        if (std::binary_search(core.begin(), core.end(), i)) {
          hit = true;
          break;
        }
      }
      if (!hit) return false;
    }
    return true;
  }

  std::size_t m_;
  ConsistencyOracle oracle_;
  std::map<std::vector<bool>, bool> cache_;
  std::vector<std::vector<std::size_t>> cores_;
};

// Calls f on each k-subset of {0..m-1} in lexicographic order until f
// returns false.
template <class F>
bool for_each_combination(std::size_t m, std::size_t k, F&& f) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  if (k > m) return true;
  while (true) {
    if (!f(idx)) return false;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == m - k + i - 1) --i;
    if (i == 0) return true;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

ConflictReport min_conflict_sets(const std::vector<Constraint>& cs, const Box& b, std::size_t max_sets) {
  ExplainOptions opt;
  opt.max_sets = max_sets;
  return min_conflict_sets(cs, b, opt);
}

ConflictReport min_conflict_sets(const std::vector<Constraint>& cs, const Box& b, const ExplainOptions& opt) {
  ConflictReport report;
  Search s(cs, b, opt);
  const std::size_t m = cs.size();
  if (s.consistent_without({})) {
    report.stats = s.oracle_.stats();
    report.consistency_checks = s.oracle_.checks();
    return report;
  }
  report.consistent = false;
  if (b.is_empty()) {
    report.stats = s.oracle_.stats();
    report.consistency_checks = s.oracle_.checks();
    return report;
  }

  std::vector<std::size_t> all(m);
  for (std::size_t i = 0; i < m; ++i) all[i] = i;
  s.cores_.push_back(s.core_of(all));

  std::vector<std::vector<std::size_t>> found;
  for (std::size_t k = 1; k <= m && found.empty(); ++k) {
    for_each_combination(m, k, [&](const std::vector<std::size_t>& cand) {
      if (!s.hits_all(cand)) return true;
      if (s.consistent_without(cand)) {
        found.push_back(cand);
        if (found.size() >= opt.max_sets) {
          report.truncated = true;
          return false;
        }
        return true;
      }
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < m; ++i) {
        if (!std::binary_search(cand.begin(), cand.end(), i)) rest.push_back(i);
      }
      auto core = s.core_of(rest);
      if (!core.empty()) s.cores_.push_back(std::move(core));
      return true;
    });
  }

  for (const auto& f : found) {
    std::vector<std::string> ids;
    for (std::size_t i : f) ids.push_back(cs[i].id);
    std::sort(ids.begin(), ids.end());
    report.minimal_sets.push_back(std::move(ids));
  }
  std::sort(report.minimal_sets.begin(), report.minimal_sets.end(), [](const auto& x, const auto& y) {
    if (x.size() != y.size()) return x.size() < y.size();
    return x < y;
  });
  report.stats = s.oracle_.stats();
  report.consistency_checks = s.oracle_.checks();
  return report;
}

std::vector<RankedConstraint> difficulty_ranking(const ConstraintStats& stats, const std::vector<std::string>& all_ids) {
  std::vector<RankedConstraint> ranked;
  std::vector<RankedConstraint> unknown;
  for (const auto& [id, c] : stats) {
    if (c.checked == 0) continue;
    ranked.push_back({id, c.checked, c.violated, static_cast<double>(c.violated) / static_cast<double>(c.checked)});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedConstraint& a, const RankedConstraint& b) {
    if (*a.rate != *b.rate) return *a.rate > *b.rate;
    if (a.checked != b.checked) return a.checked > b.checked;
    return a.id < b.id;
  });
  std::vector<std::string> rest = all_ids;
  for (const auto& [id, c] : stats) {
    if (c.checked == 0 && std::find(rest.begin(), rest.end(), id) == rest.end()) rest.push_back(id);
  }
  for (const auto& id : rest) {
    auto it = stats.find(id);
    if (it != stats.end() && it->second.checked > 0) continue;
    ranked.push_back({id, 0, 0, std::nullopt});
  }
  return ranked;
}

nlohmann::ordered_json to_json(const ConflictReport& r) {
  nlohmann::ordered_json j;
  j["consistent"] = r.consistent;
  j["minimal_sets"] = r.minimal_sets;
  j["truncated"] = r.truncated;
  j["consistency_checks"] = r.consistency_checks;
  nlohmann::ordered_json st = nlohmann::ordered_json::object();
  for (const auto& [id, c] : r.stats) st[id] = {{"checked", c.checked}, {"violated", c.violated}};
  j["stats"] = st;
  return j;
}

std::string render_report(const ConflictReport& r, const std::vector<Constraint>& cs) {
  std::ostringstream os;
  if (r.consistent) {
    os << "constraints are consistent on the box; nothing to explain\n";
    return os.str();
  }
  auto reliability = [&](const std::string& id) -> std::string {
    for (const auto& c : cs) {
      if (c.id == id && !c.reliability.empty()) return " (reliability=" + c.reliability + ")";
    }
    return "";
  };
  os << "propagation proves the constraints inconsistent\n";
  if (r.minimal_sets.empty()) {
    os << "no constraint set restores consistency (the domain box itself is empty)\n";
  } else {
    os << "smallest sets of constraints to lift (" << r.minimal_sets.size()
       << (r.truncated ? ", enumeration truncated" : "") << "):\n";
    for (std::size_t i = 0; i < r.minimal_sets.size(); ++i) {
      os << "  " << std::setw(3) << i + 1 << ".";
      for (const auto& id : r.minimal_sets[i]) os << ' ' << id << reliability(id);
      os << '\n';
    }
  }
  os << "\n  " << std::left << std::setw(28) << "constraint" << std::right << std::setw(10) << "checked"
     << std::setw(10) << "violated" << '\n';
  for (const auto& e : difficulty_ranking(r.stats)) {
    os << "  " << std::left << std::setw(28) << e.id << std::right << std::setw(10) << e.checked << std::setw(10)
       << e.violated << '\n';
  }
  return os.str();
}

}  // namespace steadyscan
