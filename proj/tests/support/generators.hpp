#pragma once

// Hand-rolled generators for property tests: random constraint systems over
// a handful of unknowns, with a pointwise satisfaction oracle.

#include <random>
#include <string>
#include <vector>

#include "steadyscan/assignment.hpp"
#include "steadyscan/model.hpp"

namespace steadyscan::testing {

inline Model make_box_model(const std::vector<Interval>& domains) {
  Model m;
  m.name = "random";
  for (std::size_t i = 0; i < domains.size(); ++i) m.unknowns.push_back({"x" + std::to_string(i), domains[i]});
  m.finalize();
  return m;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Expr random_expr(std::mt19937_64& rng, const Model& m, int depth) {
  const int n = static_cast<int>(m.unknowns.size());
  std::uniform_int_distribution<int> pick_var(0, n - 1);
  auto leaf = [&]() -> Expr {
    if (uniform(rng, 0, 1) < 0.25) return Expr::constant(std::round(uniform(rng, -3, 3) * 4) / 4);
    const int i = pick_var(rng);
    return Expr::unknown(i, m.unknowns[i].name);
  };
  if (depth <= 0) return leaf();
  switch (std::uniform_int_distribution<int>(0, 11)(rng)) {
    case 0:
    case 1: return random_expr(rng, m, depth - 1) + random_expr(rng, m, depth - 1);
    case 2: return random_expr(rng, m, depth - 1) - random_expr(rng, m, depth - 1);
    case 3:
    case 4: return random_expr(rng, m, depth - 1) * random_expr(rng, m, depth - 1);
    case 5: return random_expr(rng, m, depth - 1) / (Expr::constant(1.5) + abs(random_expr(rng, m, depth - 1)));
    case 6: return pow(random_expr(rng, m, depth - 1), Expr::constant(std::uniform_int_distribution<int>(2, 3)(rng)));
    case 7: return abs(random_expr(rng, m, depth - 1));
    case 8: return min(random_expr(rng, m, depth - 1), random_expr(rng, m, depth - 1));
    case 9: return max(random_expr(rng, m, depth - 1), random_expr(rng, m, depth - 1));
    case 10:
      return sigmoid_plus(random_expr(rng, m, depth - 1), Expr::constant(uniform(rng, 0.2, 2.0)),
                          Expr::constant(std::uniform_int_distribution<int>(1, 4)(rng)));
    default: return -random_expr(rng, m, depth - 1);
  }
}

inline Assignment random_point(std::mt19937_64& rng, const Box& b) {
  Assignment a(b.space());
  for (std::size_t i = 0; i < b.size(); ++i) a.set(i, uniform(rng, b[i].lo(), b[i].hi()));
  return a;
}

/// Real-valued satisfaction in double arithmetic; undefined points fail.
inline bool satisfied(const Constraint& c, const Assignment& a) {
  double l = 0.0;
  double r = 0.0;
  try {
    l = eval_point(c.lhs, a);
    if (c.relation != Relation::In) r = eval_point(c.rhs, a);
  } catch (const Error&) {
    return false;
  }
  if (!std::isfinite(l) || !std::isfinite(r)) return false;
  switch (c.relation) {
    case Relation::Eq: return l == r;
    case Relation::Lt: return l < r;
    case Relation::Le: return l <= r;
    case Relation::Gt: return l > r;
    case Relation::Ge: return l >= r;
    case Relation::In: return c.range.contains(l);
  }
  return false;
}

inline bool satisfies_all(const std::vector<Constraint>& cs, const Assignment& a) {
  for (const auto& c : cs) {
    if (!satisfied(c, a)) return false;
  }
  return true;
}

/// Inequality constraint whose threshold is the expression's value at a
/// random point of the domain, so a fair share of the box satisfies it.
inline Constraint random_inequality(std::mt19937_64& rng, const Model& m, int depth, const std::string& id) {
  Constraint c;
  c.id = id;
  c.lhs = random_expr(rng, m, depth);
  double pivot = 0.0;
  try {
    pivot = eval_point(c.lhs, random_point(rng, m.domain_box()));
  } catch (const Error&) {
  }
  if (!std::isfinite(pivot)) pivot = 0.0;
  switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
    case 0: c.relation = Relation::Lt; break;
    case 1: c.relation = Relation::Le; break;
    case 2: c.relation = Relation::Gt; break;
    case 3: c.relation = Relation::Ge; break;
    default: {
      c.relation = Relation::In;
      const double half = 0.1 + std::abs(pivot) * uniform(rng, 0.05, 0.5);
      c.range = Interval(pivot - half, pivot + half);
      return c;
    }
  }
  c.rhs = Expr::constant(pivot);
  return c;
}

/// A system over n unknowns in [-3, 3] with k random inequalities.
struct RandomSystem {
  Model model;
  std::vector<Constraint> constraints;
};

inline RandomSystem random_system(std::mt19937_64& rng, int n, int k, int depth = 2) {
  std::vector<Interval> doms;
  for (int i = 0; i < n; ++i) {
    const double a = uniform(rng, -3, 2);
    doms.emplace_back(a, a + uniform(rng, 0.5, 3));
  }
  RandomSystem s{make_box_model(doms), {}};
  for (int j = 0; j < k; ++j) s.constraints.push_back(random_inequality(rng, s.model, depth, "c" + std::to_string(j)));
  return s;
}

}  // namespace steadyscan::testing
