#include "steadyscan/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "steadyscan/propagate.hpp"

namespace steadyscan {

namespace {

Expr residual_expr(const Constraint& c) { return c.rhs.is_constant(0.0) ? c.lhs : c.lhs - c.rhs; }

// How much room an unknown has: decades for log-scale positive ranges,
// relative width otherwise.
double spread(const Interval& x, Scale s) {
  if (s == Scale::Log && x.lo() > 0.0 && std::isfinite(x.hi())) return std::log10(x.hi() / x.lo());
  return relative_width(x);
}

bool nearly_equal(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
  std::vector<std::size_t> parent;
};

// Solves residual == 0 for u given every other reference, or nothing when
// the form gives no real root.
struct Solver {
  std::optional<PowerForm> form;
};

std::optional<double> solve_with(const PowerForm& f, const Assignment& a, const Interval& domain) {
  const double coef = eval_point(f.coefficient, a);
  const double rest = eval_point(f.rest, a);
  if (coef == 0.0 || !std::isfinite(coef) || !std::isfinite(rest)) return std::nullopt;
  const double rhs = -rest / coef;
  if (f.exponent == 1) return rhs;
  const int n = std::abs(f.exponent);
  const double base = f.exponent > 0 ? rhs : 1.0 / rhs;
  if (n % 2 == 1) return std::copysign(std::pow(std::abs(base), 1.0 / n), base);
  if (base < 0.0) return std::nullopt;
  const double root = std::pow(base, 1.0 / n);
  return domain.contains(root) || !domain.contains(-root) ? root : -root;
}

std::optional<PowerForm> solver_for(const Constraint& c, int u) {
  const Expr r = residual_expr(c);
  if (auto lf = linear_split(r, u)) return PowerForm{lf->coefficient, lf->rest, 1};
  return isolated_power(r, u);
}

}  // namespace

DomainViolation::DomainViolation(std::string name, double value, Interval domain)
    : Error("deduced " + name + " = " + format_number(value) + " outside its interval"),
      name_(std::move(name)),
      value_(value),
      domain_(domain) {}

DependencyGraph dependency_graph(const std::vector<Constraint>& cs, std::size_t n, const std::vector<bool>& assigned,
                                 const std::vector<bool>& skip) {
  DependencyGraph g;
  g.open_refs.resize(cs.size());
  UnionFind uf(n + cs.size());
  std::vector<bool> touched(n, false);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    for (int u : cs[i].unknowns()) {
      if (!assigned[u]) g.open_refs[i].push_back(u);
    }
    if (g.open_refs[i].empty()) {
      g.checkable.push_back(i);
      continue;
    }
    if (!skip.empty() && skip[i]) continue;
    for (int u : g.open_refs[i]) {
      uf.unite(static_cast<std::size_t>(u), n + i);
      touched[u] = true;
    }
  }
  std::map<std::size_t, std::size_t> comp_of_root;
  for (std::size_t u = 0; u < n; ++u) {
    if (assigned[u]) continue;
    const std::size_t r = uf.find(u);
    auto [it, fresh] = comp_of_root.emplace(r, g.components.size());
    if (fresh) g.components.emplace_back();
    g.components[it->second].unknowns.push_back(static_cast<int>(u));
  }
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (g.open_refs[i].empty() || (!skip.empty() && skip[i])) continue;
    g.components[comp_of_root.at(uf.find(n + i))].constraints.push_back(i);
  }
  (void)touched;
  return g;
}

DependencyGraph dependency_graph(const std::vector<Constraint>& cs, const SpacePtr& space,
                                 const std::set<std::string>& assigned) {
  std::vector<bool> mask(space->size(), false);
  for (const auto& n : assigned) {
    if (auto i = space->index(n)) mask[*i] = true;
  }
  return dependency_graph(cs, space->size(), mask);
}

std::size_t articulation_score(const DependencyGraph& g, int u) {
  const DependencyGraph::Component* home = nullptr;
  for (const auto& c : g.components) {
    if (std::find(c.unknowns.begin(), c.unknowns.end(), u) != c.unknowns.end()) home = &c;
  }
  if (!home) return 0;
  auto neighbourhood = [&](int v) {
    std::vector<std::size_t> nb;
    for (std::size_t ci : home->constraints) {
      const auto& refs = g.open_refs[ci];
      if (std::find(refs.begin(), refs.end(), v) != refs.end()) nb.push_back(ci);
    }
    return nb;
  };
  const auto mine = neighbourhood(u);
  std::vector<int> rest;
  for (int v : home->unknowns) {
    if (neighbourhood(v) != mine) rest.push_back(v);
  }
  if (rest.empty()) return 0;
  std::map<int, std::size_t> slot;
  for (std::size_t k = 0; k < rest.size(); ++k) slot[rest[k]] = k;
  UnionFind uf(rest.size());
  for (std::size_t ci : home->constraints) {
    std::optional<std::size_t> first;
    for (int v : g.open_refs[ci]) {
      auto it = slot.find(v);
      if (it == slot.end()) continue;
      if (first)
        uf.unite(*first, it->second);
      else
        first = it->second;
    }
  }
  std::set<std::size_t> roots;
  for (std::size_t k = 0; k < rest.size(); ++k) roots.insert(uf.find(k));
  return roots.size();
}

DeductionPlan plan_deductions(const std::vector<Constraint>& cs, const std::vector<UnknownDecl>& unknowns,
                              const Box& hull, const std::vector<bool>& assigned) {
  const std::size_t n = unknowns.size();
  DeductionPlan plan;
  plan.is_output.assign(n, false);
  plan.closing.assign(cs.size(), false);
  std::vector<std::vector<int>> refs(cs.size());
  std::vector<bool> remaining(cs.size(), false);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    refs[i] = cs[i].unknowns();
    remaining[i] = cs[i].relation == Relation::Eq;
  }
  auto is_assigned = [&](int u) { return !assigned.empty() && assigned[u]; };
  while (true) {
    std::vector<int> count(n, 0);
    std::vector<std::size_t> where(n, 0);
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (!remaining[i]) continue;
      for (int u : refs[i]) {
        ++count[u];
        where[u] = i;
      }
    }
    int best = -1;
    double best_spread = -1.0;
    for (std::size_t u = 0; u < n; ++u) {
      if (count[u] != 1 || plan.is_output[u] || is_assigned(static_cast<int>(u))) continue;
      const double s = spread(hull[u], unknowns[u].scale);
      if (best >= 0 && !(s > best_spread && !nearly_equal(s, best_spread))) continue;
      if (!solver_for(cs[where[u]], static_cast<int>(u))) continue;
      best = static_cast<int>(u);
      best_spread = s;
    }
    if (best < 0) break;
    const std::size_t eq = where[best];
    plan.output[eq] = best;
    plan.is_output[best] = true;
    remaining[eq] = false;
  }
  for (const auto& [eq, u] : plan.output) {
    bool elsewhere = false;
    for (std::size_t i = 0; i < cs.size() && !elsewhere; ++i) {
      if (i != eq) elsewhere = std::binary_search(refs[i].begin(), refs[i].end(), u);
    }
    plan.closing[eq] = !elsewhere;
  }
  return plan;
}

std::vector<std::string> select_sampling_set(const DependencyGraph& g, const std::vector<Constraint>& cs,
                                             const std::vector<UnknownDecl>& unknowns, const BoxUnion& u,
                                             const std::vector<bool>& assigned) {
  if (u.empty()) throw Error("cannot select a sampling set on an empty union");
  const Box h = u.hull();
  const DeductionPlan plan = plan_deductions(cs, unknowns, h, assigned);
  struct Key {
    int u;
    double width;
    std::size_t score;
  };
  std::vector<Key> keys;
  for (std::size_t i = 0; i < unknowns.size(); ++i) {
    if (plan.is_output[i] || (!assigned.empty() && assigned[i])) continue;
    keys.push_back({static_cast<int>(i), relative_width(h[i]), articulation_score(g, static_cast<int>(i))});
  }
  std::stable_sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    if (!nearly_equal(a.width, b.width)) return a.width < b.width;
    if (a.score != b.score) return a.score > b.score;
    return a.u < b.u;
  });
  std::vector<std::string> out;
  for (const auto& k : keys) out.push_back(unknowns[k.u].name);
  return out;
}

double slack(const Constraint& c, const Assignment& a) {
  const double l = eval_point(c.lhs, a);
  if (c.relation == Relation::In) return std::min(l - c.range.lo(), c.range.hi() - l);
  const double r = eval_point(c.rhs, a);
  switch (c.relation) {
    case Relation::Eq: return l - r;
    case Relation::Lt:
    case Relation::Le: return r - l;
    default: return l - r;
  }
}

double residual_scale(const Constraint& c, const Assignment& a) {
  double scale = c.relation == Relation::In ? 0.0 : std::abs(eval_point(c.rhs, a));
  for (const auto& t : additive_terms(residual_expr(c))) scale = std::max(scale, std::abs(eval_point(t, a)));
  return scale;
}

bool holds(const Constraint& c, const Assignment& a) {
  const double s = slack(c, a);
  if (std::isnan(s)) return false;
  switch (c.relation) {
    case Relation::Eq: return std::abs(s) <= kResidualAtol + kResidualRtol * residual_scale(c, a);
    case Relation::Lt:
    case Relation::Gt: return s > 0.0;
    default: return s >= 0.0;
  }
}

Assignment deduce(const Assignment& a, const std::vector<Constraint>& equalities, const Box& domains) {
  Assignment out = a;
  std::vector<std::vector<int>> refs;
  for (const auto& c : equalities) refs.push_back(c.unknowns());
  std::vector<bool> solved(equalities.size(), false);
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t i = 0; i < equalities.size(); ++i) {
      if (solved[i] || equalities[i].relation != Relation::Eq) continue;
      int open = -1;
      int n_open = 0;
      for (int u : refs[i]) {
        if (!out.has(static_cast<std::size_t>(u))) {
          open = u;
          ++n_open;
        }
      }
      if (n_open != 1) continue;
      auto form = solver_for(equalities[i], open);
      if (!form) continue;
      const auto v = solve_with(*form, out, domains[open]);
      const std::string& name = out.space()->name(open);
      if (!v || !std::isfinite(*v)) throw DomainViolation(name, v.value_or(std::nan("")), domains[open]);
      if (!domains[open].contains(*v)) throw DomainViolation(name, *v, domains[open]);
      out.set(static_cast<std::size_t>(open), *v, Provenance::Deduced);
      solved[i] = true;
      progress = true;
    }
  }
  return out;
}

CheckResult early_check(const Assignment& a, const std::vector<Constraint>& cs, ConstraintStats* stats) {
  CheckResult r;
  for (const auto& c : cs) {
    const auto refs = c.unknowns();
    if (!std::all_of(refs.begin(), refs.end(), [&](int u) { return a.has(static_cast<std::size_t>(u)); })) continue;
    const bool ok = holds(c, a);
    if (stats) {
      auto& k = (*stats)[c.id];
      ++k.checked;
      if (!ok) ++k.violated;
    }
    if (!ok) {
      r.pass = false;
      r.failed.push_back(c.id);
    }
  }
  return r;
}

std::vector<Constraint> add_redundant(const std::vector<Constraint>& cs, const std::vector<RedundancyRule>& rules,
                                      const Box& b) {
  std::vector<Constraint> out;
  auto emit = [&](const Constraint& source, const Expr& sum, Relation rel, double bound) {
    const auto terms = additive_terms(sum);
    if (terms.size() < 2) return;
    for (const auto& t : terms) {
      if (!(eval_interval(t, b).lo() >= 0.0)) return;
    }
    for (std::size_t k = 0; k < terms.size(); ++k) {
      Constraint r;
      r.id = source.id + "_r" + std::to_string(out.size() + 1);
      r.lhs = terms[k];
      r.relation = rel;
      r.rhs = Expr::constant(bound);
      r.tags = {"redundant"};
      r.generated = true;
      out.push_back(std::move(r));
    }
  };
  for (const auto& c : cs) {
    if (c.is_redundant()) continue;
    const std::size_t before = out.size();
    if ((c.relation == Relation::Lt || c.relation == Relation::Le) && c.rhs.is_constant())
      emit(c, c.lhs, c.relation, c.rhs.value());
    else if (c.relation == Relation::In && std::isfinite(c.range.hi()))
      emit(c, c.lhs, Relation::Le, c.range.hi());
    for (const auto& rule : rules) {
      if (rule.source_id == c.id) emit(c, rule.sum, rule.relation, rule.bound);
    }
    // number the generated bounds per source
    for (std::size_t k = before; k < out.size(); ++k) out[k].id = c.id + "_r" + std::to_string(k - before + 1);
  }
  return out;
}

std::vector<std::string> verify(const Model& m, const Assignment& a) {
  std::vector<std::string> failed;
  for (std::size_t i = 0; i < m.unknowns.size(); ++i) {
    if (!a.has(i) || !m.unknowns[i].domain.contains(a.value(i))) failed.push_back("domain(" + m.unknowns[i].name + ")");
  }
  if (!failed.empty()) return failed;
  for (const auto& c : m.constraints) {
    if (c.is_redundant()) continue;
    bool ok = false;
    try {
      ok = holds(c, a);
    } catch (const Error&) {
    }
    if (!ok) failed.push_back(c.id);
  }
  return failed;
}

void SearchStats::merge(const SearchStats& o) {
  merge_into(constraints, o.constraints);
  merge_into(domains, o.domains);
  for (const auto& [k, v] : o.pruned) pruned[k] += v;
  for (const auto& [k, v] : o.subproblems) {
    subproblems[k].attempts += v.attempts;
    subproblems[k].successes += v.successes;
  }
  attempts += o.attempts;
  samples_drawn += o.samples_drawn;
  values_drawn += o.values_drawn;
  solutions += o.solutions;
}

namespace {

class Engine {
public:
  Engine(const Model& m, const BoxUnion& u, const SamplerOptions& opt) : m_(m), u_(u), opt_(opt) {
    n_ = m.unknowns.size();
    for (const auto& c : m.constraints) {
      if (!c.is_redundant()) cs_.push_back(c);
    }
    const Box hull = u.hull();
    if (opt.use_redundant) {
      for (auto& r : add_redundant(cs_, m.redundancy_rules, hull)) cs_.push_back(std::move(r));
    }
    refs_.resize(cs_.size());
    forms_.resize(cs_.size());
    for (std::size_t i = 0; i < cs_.size(); ++i) {
      refs_[i] = cs_[i].unknowns();
      if (cs_[i].relation != Relation::Eq) continue;
      for (int v : refs_[i]) forms_[i][v] = solver_for(cs_[i], v);
    }
    plan_ = plan_deductions(cs_, m.unknowns, hull);
    skip_ = opt.decompose ? plan_.closing : std::vector<bool>(cs_.size(), false);
    const auto g = dependency_graph(cs_, n_, std::vector<bool>(n_, false), skip_);
    for (const auto& name : select_sampling_set(g, cs_, m.unknowns, u)) order_.push_back(*m.unknown_index(name));
    rank_.assign(n_, INT_MAX);
    for (std::size_t k = 0; k < order_.size(); ++k) rank_[order_[k]] = static_cast<int>(k);
    sys_ = ConstraintSystem(cs_, u.boxes.front().space());

    // boxes weighted by (log-)volume
    for (const auto& b : u.boxes) {
      double w = 1.0;
      for (std::size_t d = 0; d < b.size(); ++d) {
        const double s = m.unknowns[d].scale == Scale::Log && b[d].lo() > 0.0 ? std::log(b[d].hi() / b[d].lo())
                                                                               : b[d].width();
        w *= s;
      }
      weights_.push_back(std::isfinite(w) ? w : 0.0);
    }
    if (std::all_of(weights_.begin(), weights_.end(), [](double w) { return w <= 0.0; }))
      std::fill(weights_.begin(), weights_.end(), 1.0);
  }

  const std::vector<int>& order() const { return order_; }

  struct Outcome {
    std::optional<Solution> solution;
    SearchStats stats;
  };

  Outcome attempt(std::uint64_t index, const SearchStats& history) const {
    Run run(*this, history);
    std::seed_seq seq{static_cast<std::uint32_t>(opt_.seed), static_cast<std::uint32_t>(opt_.seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    run.rng.seed(seq);
    std::discrete_distribution<std::size_t> pick(weights_.begin(), weights_.end());
    run.box = &u_.boxes[pick(run.rng)];
    run.st.a = Assignment(run.box->space());
    run.st.dims = run.box->dims();
    run.st.done.assign(cs_.size(), 0);
    ++run.stats.attempts;
    ++run.stats.samples_drawn;
    auto& root = run.stats.subproblems["root"];
    ++root.attempts;

    Outcome out;
    std::vector<int> scope;
    for (std::size_t v = 0; v < n_; ++v) {
      if (!(opt_.decompose && closing_output(static_cast<int>(v)))) scope.push_back(static_cast<int>(v));
    }
    bool ok = false;
    try {
      ok = run.solve(scope) && run.st.a.total();
    } catch (const Error&) {
      ok = false;
    }
    if (ok && verify(m_, run.st.a).empty()) {
      ++root.successes;
      ++run.stats.solutions;
      Solution s;
      s.attempt = index;
      s.assignment = run.st.a;
      for (const auto& c : m_.constraints) {
        if (!c.is_redundant()) s.residuals.emplace_back(c.id, slack(c, s.assignment));
      }
      out.solution = std::move(s);
    }
    out.stats = std::move(run.stats);
    return out;
  }

private:
  bool closing_output(int v) const {
    for (const auto& [eq, u] : plan_.output) {
      if (u == v && plan_.closing[eq]) return true;
    }
    return false;
  }

  struct State {
    Assignment a;
    std::vector<Interval> dims;
    std::vector<char> done;
  };

  struct Run {
    Run(const Engine& e, const SearchStats& h) : eng(e), history(h) {}
    const Engine& eng;
    const SearchStats& history;
    std::mt19937_64 rng;
    const Box* box = nullptr;
    State st;
    SearchStats stats;

    double draw(const Interval& x, Scale s) {
      if (x.is_degenerate()) return x.lo();
      if (s == Scale::Log && x.lo() > 0.0) {
        const double v = std::exp(std::uniform_real_distribution<double>(std::log(x.lo()), std::log(x.hi()))(rng));
        return std::clamp(v, x.lo(), x.hi());
      }
      return std::uniform_real_distribution<double>(x.lo(), x.hi())(rng);
    }

    double violation_rate(const std::vector<std::size_t>& cons) const {
      double worst = 0.0;
      for (std::size_t ci : cons) {
        auto it = history.constraints.find(eng.cs_[ci].id);
        if (it == history.constraints.end() || it->second.checked == 0) continue;
        worst = std::max(worst, static_cast<double>(it->second.violated) / static_cast<double>(it->second.checked));
      }
      return worst;
    }

    std::string label(const DependencyGraph::Component& c) const {
      std::vector<std::string> ids;
      for (std::size_t ci : c.constraints) ids.push_back(eng.cs_[ci].id);
      if (ids.empty()) {
        for (int u : c.unknowns) ids.push_back(eng.m_.unknowns[u].name);
      }
      std::sort(ids.begin(), ids.end());
      std::string s;
      for (const auto& id : ids) s += (s.empty() ? "" : ",") + id;
      return s;
    }

    // Deductions to a fixpoint, then every newly checkable constraint.
    bool propagate_values() {
      const auto& cs = eng.cs_;
      bool progress = true;
      bool ok = true;
      while (progress) {
        progress = false;
        for (std::size_t i = 0; i < cs.size(); ++i) {
          if (st.done[i] || cs[i].relation != Relation::Eq) continue;
          int open = -1;
          int n_open = 0;
          for (int u : eng.refs_[i]) {
            if (!st.a.has(static_cast<std::size_t>(u))) {
              open = u;
              ++n_open;
            }
          }
          if (n_open == 0) {
            st.done[i] = 1;
            const bool h = holds(cs[i], st.a);
            auto& k = stats.constraints[cs[i].id];
            ++k.checked;
            if (!h) {
              ++k.violated;
              ok = false;
            }
            continue;
          }
          if (n_open != 1) continue;
          const auto& form = eng.forms_[i].at(open);
          if (!form) continue;
          const Interval& dom = (*box)[open];
          const auto v = solve_with(*form, st.a, dom);
          auto& dk = stats.domains[eng.m_.unknowns[open].name];
          ++dk.checked;
          if (!v || !std::isfinite(*v) || !dom.contains(*v)) {
            ++dk.violated;
            return false;
          }
          st.a.set(static_cast<std::size_t>(open), *v, Provenance::Deduced);
          st.dims[open] = Interval(*v);
          st.done[i] = 1;
          progress = true;
        }
      }
      for (std::size_t i = 0; i < cs.size(); ++i) {
        if (st.done[i] || cs[i].relation == Relation::Eq) continue;
        const auto& refs = eng.refs_[i];
        if (!std::all_of(refs.begin(), refs.end(), [&](int u) { return st.a.has(static_cast<std::size_t>(u)); }))
          continue;
        st.done[i] = 1;
        const bool h = holds(cs[i], st.a);
        auto& k = stats.constraints[cs[i].id];
        ++k.checked;
        if (!h) {
          ++k.violated;
          ok = false;
        }
      }
      return ok;
    }

    bool solve(const std::vector<int>& scope) {
      std::vector<bool> in_scope(eng.n_, false);
      for (int v : scope) in_scope[v] = true;
      while (true) {
        std::vector<bool> fixed(eng.n_);
        bool open_left = false;
        for (std::size_t v = 0; v < eng.n_; ++v) {
          fixed[v] = st.a.has(v) || !in_scope[v];
          open_left = open_left || !fixed[v];
        }
        if (!open_left) return true;
        if (eng.opt_.decompose) {
          auto g = dependency_graph(eng.cs_, eng.n_, fixed, eng.skip_);
          if (g.components.size() > 1) return solve_components(g);
        }
        int next = -1;
        for (int v : eng.order_) {
          if (!fixed[v]) {
            next = v;
            break;
          }
        }
        if (next < 0) return false;  // only deductions left and none fires
        if (eng.opt_.conditional) {
          std::size_t failed = 0;
          if (!eng.sys_.fixpoint(st.dims, eng.opt_.tol, {}, &failed)) {
            ++stats.pruned[eng.cs_[failed].id];
            return false;
          }
        }
        const Interval x = st.dims[next];
        if (x.is_empty() || !x.is_bounded()) return false;
        const double v = draw(x, eng.m_.unknowns[next].scale);
        ++stats.values_drawn;
        st.a.set(static_cast<std::size_t>(next), v, Provenance::Sampled);
        st.dims[next] = Interval(v);
        if (!propagate_values()) return false;
      }
    }

    bool solve_components(const DependencyGraph& g) {
      std::vector<std::size_t> idx(g.components.size());
      std::iota(idx.begin(), idx.end(), 0);
      auto tightness = [&](const DependencyGraph::Component& c) {
        return static_cast<long>(c.constraints.size()) - static_cast<long>(c.unknowns.size());
      };
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const auto& ca = g.components[a];
        const auto& cb = g.components[b];
        if (tightness(ca) != tightness(cb)) return tightness(ca) > tightness(cb);
        const double ra = violation_rate(ca.constraints);
        const double rb = violation_rate(cb.constraints);
        if (ra != rb) return ra > rb;
        return ca.unknowns.front() < cb.unknowns.front();
      });
      for (std::size_t k : idx) {
        const auto& comp = g.components[k];
        auto& counter = stats.subproblems[label(comp)];
        bool solved = false;
        for (int r = 0; r < std::max(1, eng.opt_.retries) && !solved; ++r) {
          const State saved = st;
          ++counter.attempts;
          ++stats.samples_drawn;
          if (solve(comp.unknowns)) {
            ++counter.successes;
            solved = true;
          } else {
            st = saved;
          }
        }
        if (!solved) return false;
      }
      return true;
    }
  };

  const Model& m_;
  const BoxUnion& u_;
  SamplerOptions opt_;
  std::size_t n_ = 0;
  std::vector<Constraint> cs_;
  std::vector<std::vector<int>> refs_;
  std::vector<std::map<int, std::optional<PowerForm>>> forms_;
  DeductionPlan plan_;
  std::vector<bool> skip_;
  std::vector<int> order_;
  std::vector<int> rank_;
  ConstraintSystem sys_;
  std::vector<double> weights_;
};

constexpr std::size_t kBatch = 64;

}  // namespace

SampleResult sample_steady_states(const Model& m, const BoxUnion& u, const SamplerOptions& opt) {
  if (u.empty()) throw Error("cannot sample from an empty union");
  if (opt.target < 1) throw Error("sampling target must be at least 1");
  const auto t0 = std::chrono::steady_clock::now();
  const Engine engine(m, u, opt);
  SampleResult result;
  for (int v : engine.order()) result.sampling_order.push_back(m.unknowns[v].name);

  std::uint64_t next = 0;
  while (result.solutions.size() < opt.target && next < opt.budget) {
    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(kBatch, opt.budget - next));
    std::vector<Engine::Outcome> outs(n);
    const SearchStats snapshot = result.stats;
    auto work = [&](std::size_t k) { outs[k] = engine.attempt(next + k, snapshot); };
    const std::size_t jobs = static_cast<std::size_t>(std::max(1, opt.jobs));
    if (jobs == 1) {
      for (std::size_t k = 0; k < n; ++k) work(k);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t j = 0; j < jobs; ++j) {
        pool.emplace_back([&, j] {
          for (std::size_t k = j; k < n; k += jobs) work(k);
        });
      }
      for (auto& t : pool) t.join();
    }
    for (std::size_t k = 0; k < n && result.solutions.size() < opt.target; ++k) {
      result.stats.merge(outs[k].stats);
      if (outs[k].solution) result.solutions.push_back(std::move(*outs[k].solution));
    }
    next += n;
  }
  result.budget_exhausted = result.solutions.size() < opt.target;
  result.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

nlohmann::ordered_json to_json(const Solution& s) {
  nlohmann::ordered_json j;
  j["attempt"] = s.attempt;
  nlohmann::ordered_json values = nlohmann::ordered_json::object();
  nlohmann::ordered_json deduced = nlohmann::ordered_json::array();
  const auto& sp = *s.assignment.space();
  for (std::size_t i = 0; i < sp.size(); ++i) {
    values[sp.name(i)] = s.assignment.value(i);
    if (s.assignment.provenance(i) == Provenance::Deduced) deduced.push_back(sp.name(i));
  }
  j["values"] = values;
  j["deduced"] = deduced;
  nlohmann::ordered_json res = nlohmann::ordered_json::object();
  for (const auto& [id, v] : s.residuals) res[id] = v;
  j["residuals"] = res;
  return j;
}

Solution solution_from_json(const nlohmann::ordered_json& j, const Model& m) {
  Solution s;
  s.attempt = j.value("attempt", std::uint64_t{0});
  s.assignment = Assignment(m.space());
  std::set<std::string> deduced;
  if (j.contains("deduced")) {
    for (const auto& d : j["deduced"]) deduced.insert(d.get<std::string>());
  }
  for (const auto& [name, v] : j.at("values").items()) {
    auto i = m.unknown_index(name);
    if (!i) throw StructuralError("solution names unknown '" + name + "' not in the model");
    s.assignment.set(static_cast<std::size_t>(*i), v.get<double>(),
                     deduced.count(name) ? Provenance::Deduced : Provenance::Sampled);
  }
  if (j.contains("residuals")) {
    for (const auto& [id, v] : j["residuals"].items()) s.residuals.emplace_back(id, v.get<double>());
  }
  return s;
}

nlohmann::ordered_json to_json(const SearchStats& s) {
  nlohmann::ordered_json j;
  j["attempts"] = s.attempts;
  j["samples_drawn"] = s.samples_drawn;
  j["values_drawn"] = s.values_drawn;
  j["solutions"] = s.solutions;
  j["wall_seconds"] = s.wall_seconds;
  auto counters = [](const ConstraintStats& cs) {
    nlohmann::ordered_json o = nlohmann::ordered_json::object();
    for (const auto& [id, c] : cs) o[id] = {{"checked", c.checked}, {"violated", c.violated}};
    return o;
  };
  j["constraints"] = counters(s.constraints);
  j["domains"] = counters(s.domains);
  j["pruned"] = s.pruned;
  nlohmann::ordered_json sub = nlohmann::ordered_json::object();
  for (const auto& [k, v] : s.subproblems) sub[k] = {{"attempts", v.attempts}, {"successes", v.successes}};
  j["subproblems"] = sub;
  return j;
}

void write_solutions(std::ostream& os, const std::vector<Solution>& sols) {
  for (const auto& s : sols) os << to_json(s).dump() << '\n';
}

std::vector<Solution> read_solutions(std::istream& is, const Model& m) {
  std::vector<Solution> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(solution_from_json(nlohmann::ordered_json::parse(line), m));
  }
  return out;
}

}  // namespace steadyscan
