#pragma once

// Random inconsistent systems and the exhaustive subset oracle for
// minimum conflict sets.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "generators.hpp"
#include "steadyscan/explain.hpp"

namespace steadyscan::testing {

/// Small systems of bounds, sums and products over 2-3 unknowns in [0, 10];
/// retried until propagation proves them inconsistent.
inline RandomSystem random_conflicting_system(std::mt19937_64& rng, int max_constraints) {
  while (true) {
    const int n = std::uniform_int_distribution<int>(2, 3)(rng);
    RandomSystem s{make_box_model(std::vector<Interval>(n, Interval(0, 10))), {}};
    const int k = std::uniform_int_distribution<int>(3, max_constraints)(rng);
    std::uniform_int_distribution<int> var(0, n - 1);
    for (int j = 0; j < k; ++j) {
      Constraint c;
      c.id = "c" + std::to_string(j);
      const int a = var(rng);
      const int b = var(rng);
      const Expr xa = Expr::unknown(a, s.model.unknowns[a].name);
      const Expr xb = Expr::unknown(b, s.model.unknowns[b].name);
      const double t = std::round(uniform(rng, 0.5, 9.5) * 2) / 2;
      switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
        case 0: c.lhs = xa; break;
        case 1: c.lhs = xa + xb; break;
        case 2: c.lhs = xa - xb; break;
        case 3: c.lhs = xa * xb / Expr::constant(5.0); break;
        default: c.lhs = pow(xa, Expr::constant(2.0)) / Expr::constant(10.0); break;
      }
      c.relation = std::uniform_int_distribution<int>(0, 1)(rng) ? Relation::Gt : Relation::Lt;
      c.rhs = Expr::constant(c.lhs.kind() == NodeKind::Sub ? t - 5.0 : t);
      s.constraints.push_back(c);
    }
    ExplainOptions opt;
    ConsistencyOracle oracle(s.constraints, s.model.domain_box(), opt);
    if (!oracle.consistent(std::vector<bool>(s.constraints.size(), true))) return s;
  }
}

/// Every minimum-size set of constraints whose removal the oracle accepts,
/// found by walking all subsets by size.
inline std::vector<std::vector<std::string>> exhaustive_min_sets(const std::vector<Constraint>& cs, const Box& b) {
  ConsistencyOracle oracle(cs, b);
  const std::size_t m = cs.size();
  std::vector<std::vector<std::string>> out;
  for (std::size_t k = 0; k <= m && out.empty(); ++k) {
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
      std::vector<bool> keep(m);
      std::vector<std::string> removed;
      for (std::size_t i = 0; i < m; ++i) {
        keep[i] = !(mask & (1u << i));
        if (!keep[i]) removed.push_back(cs[i].id);
      }
      if (oracle.consistent(keep)) {
        std::sort(removed.begin(), removed.end());
        out.push_back(removed);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace steadyscan::testing
