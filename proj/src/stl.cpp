#include "steadyscan/stl.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <set>

#include "steadyscan/model_parser.hpp"

namespace steadyscan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_keyword(const std::string& s) {
  static const std::set<std::string> kw = {"always", "eventually", "until", "and", "or", "not"};
  return kw.count(s) > 0;
}

class StlParser {
public:
  StlParser(const std::string& text, const std::vector<std::string>& signals, const std::map<std::string, double>& constants)
      : tokens_(tokenize(text)), signals_(signals), constants_(constants) {}

  StlFormula parse() {
    StlFormula f = implies();
    if (peek().kind != TokenKind::End) fail("unexpected '" + peek().text + "'");
    return f;
  }

private:
  using Ptr = std::shared_ptr<const StlFormula>;

  const Token& peek(std::size_t ahead = 0) const { return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)]; }
  bool is_symbol(const std::string& s, std::size_t ahead = 0) const {
    return peek(ahead).kind == TokenKind::Symbol && peek(ahead).text == s;
  }
  bool is_word(const std::string& s) const { return peek().kind == TokenKind::Identifier && peek().text == s; }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, peek().line, peek().column); }
  void expect(const std::string& s) {
    if (!is_symbol(s)) fail("expected '" + s + "'");
    ++pos_;
  }

  StlFormula node(StlKind k, std::vector<StlFormula> args) const {
    StlFormula f;
    f.kind = k;
    f.signals = signals_;
    for (auto& a : args) f.args.push_back(std::make_shared<const StlFormula>(std::move(a)));
    return f;
  }

  double bound() {
    ExpressionParser p(tokens_, pos_, [&](const std::string& n, int l, int c) -> Expr { throw UndeclaredNameError(n, l, c); });
    const double v = p.parse_signed_number();
    pos_ = p.position();
    return v;
  }

  void interval(StlFormula& f) {
    const Token& at = peek();
    expect("[");
    f.a = bound();
    expect(",");
    f.b = bound();
    expect("]");
    if (!(f.a >= 0.0)) throw ParseError("time bounds must be nonnegative", at.line, at.column);
    if (!(f.a <= f.b)) throw ParseError("inverted time bounds [" + format_number(f.a) + ", " + format_number(f.b) + "]", at.line, at.column);
  }

  StlFormula implies() {
    StlFormula lhs = disjunction();
    if (is_symbol("->")) {
      ++pos_;
      return node(StlKind::Implies, {std::move(lhs), implies()});
    }
    return lhs;
  }

  StlFormula disjunction() {
    StlFormula f = conjunction();
    while (is_word("or") || is_symbol("||")) {
      ++pos_;
      f = node(StlKind::Or, {std::move(f), conjunction()});
    }
    return f;
  }

  StlFormula conjunction() {
    StlFormula f = until();
    while (is_word("and") || is_symbol("&&")) {
      ++pos_;
      f = node(StlKind::And, {std::move(f), until()});
    }
    return f;
  }

  StlFormula until() {
    StlFormula f = unary();
    if (is_word("until")) {
      ++pos_;
      StlFormula u = node(StlKind::Until, {});
      interval(u);
      u.args = {std::make_shared<const StlFormula>(std::move(f)), std::make_shared<const StlFormula>(unary())};
      return u;
    }
    return f;
  }

  StlFormula unary() {
    if (is_word("not") || is_symbol("!")) {
      ++pos_;
      return node(StlKind::Not, {unary()});
    }
    if (is_word("always") || is_word("eventually")) {
      StlFormula f = node(peek().text == "always" ? StlKind::Always : StlKind::Eventually, {});
      ++pos_;
      interval(f);
      f.args = {std::make_shared<const StlFormula>(unary())};
      return f;
    }
    if (is_symbol("(")) {
      // a parenthesised formula, or an atom whose left side opens with '('
      const std::size_t save = pos_;
      try {
        ++pos_;
        StlFormula f = implies();
        expect(")");
        if (!is_relop()) return f;
      } catch (const UndeclaredNameError&) {
        throw;  // no reading of the parentheses can make the name exist
      } catch (const ParseError&) {
      }
      pos_ = save;
    }
    return atom();
  }

  bool is_relop() const { return is_symbol("<") || is_symbol("<=") || is_symbol(">") || is_symbol(">="); }

  Expr expression() {
    auto resolve = [&](const std::string& n, int l, int c) -> Expr {
      if (is_keyword(n)) throw ParseError("unexpected keyword '" + n + "'", l, c);
      auto it = std::find(signals_.begin(), signals_.end(), n);
      if (it != signals_.end()) return Expr::state(static_cast<int>(it - signals_.begin()), n);
      auto k = constants_.find(n);
      if (k != constants_.end()) return Expr::constant(k->second);
      throw UndeclaredNameError(n, l, c);
    };
    ExpressionParser p(tokens_, pos_, resolve);
    Expr e = p.parse_expression();
    pos_ = p.position();
    return e;
  }

  StlFormula atom() {
    StlFormula f = node(StlKind::Atom, {});
    f.lhs = expression();
    if (!is_relop()) fail("expected a comparison (<, <=, >, >=)");
    f.op = peek().text;
    ++pos_;
    f.rhs = expression();
    return f;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const std::vector<std::string>& signals_;
  const std::map<std::string, double>& constants_;
};

std::string bounds(const StlFormula& f) { return "[" + format_number(f.a) + ", " + format_number(f.b) + "]"; }

// ---------------------------------------------------------------------------
// Piecewise-linear signal algebra

void push(PlSignal& s, double t, double v) {
  if (!s.t.empty() && t <= s.t.back()) {
    s.v.back() = v;
    return;
  }
  s.t.push_back(t);
  s.v.push_back(v);
}

PlSignal negate(PlSignal s) {
  for (double& v : s.v) v = -v;
  return s;
}

// Pointwise min (take_max false) or max of two signals on their common domain,
// with every crossing inserted.
PlSignal combine(const PlSignal& x, const PlSignal& y, bool take_max) {
  const double t0 = std::max(x.t.front(), y.t.front());
  const double t1 = std::min(x.t.back(), y.t.back());
  if (t1 < t0) throw HorizonError("sub-formula signals do not overlap");
  std::vector<double> ts;
  for (double t : x.t) if (t >= t0 && t <= t1) ts.push_back(t);
  for (double t : y.t) if (t >= t0 && t <= t1) ts.push_back(t);
  ts.push_back(t0);
  ts.push_back(t1);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  auto pick = [&](double a, double b) { return take_max ? std::max(a, b) : std::min(a, b); };
  PlSignal out;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double xa = x.at(ts[k]);
    const double ya = y.at(ts[k]);
    if (k > 0) {
      const double xp = x.at(ts[k - 1]);
      const double yp = y.at(ts[k - 1]);
      const double d0 = xp - yp;
      const double d1 = xa - ya;
      if ((d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0)) {
        const double r = d0 / (d0 - d1);
        const double tc = ts[k - 1] + r * (ts[k] - ts[k - 1]);
        push(out, tc, xp + r * (xa - xp));
      }
    }
    push(out, ts[k], pick(xa, ya));
  }
  return out;
}

// Sliding-window sup over [t+a, t+b] computed exactly: between consecutive
// instants where a window edge meets a breakpoint, the edges move along
// single segments and the interior breakpoints are fixed.
PlSignal eventually(const PlSignal& f, double a, double b) {
  const double T0 = f.t.front();
  const double T1 = f.t.back() - b;
  if (!std::isfinite(b) || T1 < T0) throw HorizonError("trace ends before the window [" + format_number(a) + ", " + format_number(b) + "] closes");
  std::vector<double> cand = {T0, T1};
  for (double tau : f.t) {
    for (double c : {tau - a, tau - b}) {
      if (c > T0 && c < T1) cand.push_back(c);
    }
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  PlSignal out;
  if (cand.size() == 1) {
    double best = -kInf;
    for (std::size_t j = 0; j < f.t.size(); ++j) {
      if (f.t[j] >= T0 + a && f.t[j] <= T0 + b) best = std::max(best, f.v[j]);
    }
    best = std::max({best, f.at(T0 + a), f.at(T0 + b)});
    push(out, T0, best);
    return out;
  }
  std::deque<std::size_t> window;  // indices with decreasing values
  std::size_t next = 0;
  for (std::size_t k = 0; k + 1 < cand.size(); ++k) {
    const double c0 = cand[k];
    const double c1 = cand[k + 1];
    // interior breakpoints for t in (c0, c1): tau in [c1 + a, c0 + b]
    while (next < f.t.size() && f.t[next] <= c0 + b) {
      while (!window.empty() && f.v[window.back()] <= f.v[next]) window.pop_back();
      window.push_back(next++);
    }
    while (!window.empty() && f.t[window.front()] < c1 + a) window.pop_front();
    const double C = window.empty() ? -kInf : f.v[window.front()];
    const double l0 = f.at(c0 + a), l1 = f.at(c1 + a);
    const double r0 = f.at(c0 + b), r1 = f.at(c1 + b);
    auto g = [&](double s) {
      const double u = (s - c0) / (c1 - c0);
      return std::max({l0 + u * (l1 - l0), r0 + u * (r1 - r0), C});
    };
    std::vector<double> ts = {c0, c1};
    auto crossing = [&](double p0, double p1, double q0, double q1) {
      const double d0 = p0 - q0;
      const double d1 = p1 - q1;
      if ((d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0)) ts.push_back(c0 + d0 / (d0 - d1) * (c1 - c0));
    };
    crossing(l0, l1, r0, r1);
    if (std::isfinite(C)) {
      crossing(l0, l1, C, C);
      crossing(r0, r1, C, C);
    }
    std::sort(ts.begin(), ts.end());
    for (double s : ts) push(out, s, g(s));
  }
  return out;
}

PlSignal always(const PlSignal& f, double a, double b) { return negate(eventually(negate(f), a, b)); }

// Exact until at one instant: sup over s in [t+a, t+b] of
// min(psi(s), inf over [t, s] of phi).
double until_at(const PlSignal& phi, const PlSignal& psi, double t, double a, double b) {
  std::vector<double> ts = {t, t + a, t + b};
  for (const auto* s : {&phi, &psi}) {
    for (double x : s->t) {
      if (x > t && x < t + b) ts.push_back(x);
    }
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  double run_min = phi.at(t);
  double best = -kInf;
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    const double s0 = ts[k];
    const double s1 = ts[k + 1];
    const double p0 = phi.at(s0), p1 = phi.at(s1);
    const double q0 = psi.at(s0), q1 = psi.at(s1);
    if (s0 >= t + a) {
      // on [s0, s1]: min(q(s), run_min, p0, p(s)), concave: check ends and crossings
      std::vector<double> us = {0.0, 1.0};
      auto cross = [&](double x0, double x1, double y0, double y1) {
        const double d0 = x0 - y0;
        const double d1 = x1 - y1;
        if ((d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0)) us.push_back(d0 / (d0 - d1));
      };
      const double m = std::min(run_min, p0);
      cross(q0, q1, p0, p1);
      cross(q0, q1, m, m);
      cross(p0, p1, m, m);
      for (double u : us) {
        const double val = std::min({q0 + u * (q1 - q0), m, p0 + u * (p1 - p0)});
        best = std::max(best, val);
      }
    }
    run_min = std::min({run_min, p0, p1});
  }
  if (a == b || ts.size() == 1) best = std::max(best, std::min(psi.at(t + a), std::min(run_min, phi.at(t + a))));
  return best;
}

PlSignal until(const PlSignal& phi, const PlSignal& psi, double a, double b) {
  const double T0 = std::max(phi.t.front(), psi.t.front());
  const double T1 = std::min(phi.t.back(), psi.t.back()) - b;
  if (!std::isfinite(b) || T1 < T0) throw HorizonError("trace ends before the until window " + format_number(b) + " closes");
  std::vector<double> cand = {T0, T1};
  for (const auto* s : {&phi, &psi}) {
    for (double tau : s->t) {
      for (double c : {tau, tau - a, tau - b}) {
        if (c > T0 && c < T1) cand.push_back(c);
      }
    }
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  PlSignal out;
  auto eval = [&](double t) { return until_at(phi, psi, t, a, b); };
  double scale = 0.0;
  for (double v : phi.v) scale = std::max(scale, std::abs(v));
  for (double v : psi.v) scale = std::max(scale, std::abs(v));
  const double tol = 1e-14 * std::max(scale, 1e-300);
  // Between candidates the result is piecewise linear with few kinks; they
  // are located by bisection where the chord disagrees with the midpoint.
  std::function<void(double, double, double, double, int)> refine = [&](double t0, double v0, double t1, double v1, int depth) {
    const double tm = 0.5 * (t0 + t1);
    const double vm = eval(tm);
    if (depth < 40 && std::abs(vm - 0.5 * (v0 + v1)) > tol && t1 - t0 > 1e-12 * std::max(1.0, std::abs(t1))) {
      refine(t0, v0, tm, vm, depth + 1);
      refine(tm, vm, t1, v1, depth + 1);
    } else {
      push(out, tm, vm);
      push(out, t1, v1);
    }
  };
  double v_prev = eval(cand.front());
  push(out, cand.front(), v_prev);
  for (std::size_t k = 1; k < cand.size(); ++k) {
    const double v = eval(cand[k]);
    refine(cand[k - 1], v_prev, cand[k], v, 0);
    v_prev = v;
  }
  return out;
}

PlSignal atom_signal(const StlFormula& f, const Trace& tr) {
  std::vector<std::size_t> cols;
  for (const auto& n : f.signals) {
    auto it = std::find(tr.names.begin(), tr.names.end(), n);
    cols.push_back(it == tr.names.end() ? SIZE_MAX : static_cast<std::size_t>(it - tr.names.begin()));
  }
  PlSignal s;
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    auto leaf = [&](NodeKind, int index, const std::string& name) {
      if (cols[index] == SIZE_MAX) throw StructuralError("trace has no signal '" + name + "'");
      return tr.values[k][cols[index]];
    };
    const double l = evaluate<double>(f.lhs, leaf);
    const double r = evaluate<double>(f.rhs, leaf);
    push(s, tr.times[k], (f.op == "<" || f.op == "<=") ? r - l : l - r);
  }
  return s;
}

}  // namespace

double PlSignal::at(double time) const {
  if (t.empty()) throw HorizonError("empty signal");
  if (time <= t.front()) return v.front();
  if (time >= t.back()) return v.back();
  const auto it = std::upper_bound(t.begin(), t.end(), time);
  const std::size_t k = static_cast<std::size_t>(it - t.begin());
  const double u = (time - t[k - 1]) / (t[k] - t[k - 1]);
  return v[k - 1] + u * (v[k] - v[k - 1]);
}

double StlFormula::horizon() const {
  double h = 0.0;
  for (const auto& a : args) h = std::max(h, a->horizon());
  switch (kind) {
    case StlKind::Always:
    case StlKind::Eventually:
    case StlKind::Until: return b + h;
    default: return h;
  }
}

StlFormula parse_stl(const std::string& text, const std::vector<std::string>& signals,
                     const std::map<std::string, double>& constants) {
  return StlParser(text, signals, constants).parse();
}

StlFormula model_stl(const Model& m, const Assignment& a) {
  if (m.stl_spec.empty()) throw StructuralError("model '" + m.name + "' has no stl specification");
  std::map<std::string, double> constants;
  for (std::size_t i = 0; i < m.unknowns.size() && i < a.size(); ++i) {
    if (a.has(i)) constants[m.unknowns[i].name] = a.value(i);
  }
  return parse_stl(m.stl_spec, m.states, constants);
}

std::string to_string(const StlFormula& f) {
  auto wrap = [](const StlFormula& g) {
    return g.kind == StlKind::Atom ? to_string(g) : "(" + to_string(g) + ")";
  };
  switch (f.kind) {
    case StlKind::Atom: return to_string(f.lhs) + " " + f.op + " " + to_string(f.rhs);
    case StlKind::Not: return "not " + wrap(*f.args[0]);
    case StlKind::And: return wrap(*f.args[0]) + " and " + wrap(*f.args[1]);
    case StlKind::Or: return wrap(*f.args[0]) + " or " + wrap(*f.args[1]);
    case StlKind::Implies: return wrap(*f.args[0]) + " -> " + wrap(*f.args[1]);
    case StlKind::Always: return "always" + bounds(f) + " " + wrap(*f.args[0]);
    case StlKind::Eventually: return "eventually" + bounds(f) + " " + wrap(*f.args[0]);
    case StlKind::Until: return wrap(*f.args[0]) + " until" + bounds(f) + " " + wrap(*f.args[1]);
  }
  return "";
}

PlSignal robustness_signal(const StlFormula& f, const Trace& tr) {
  if (tr.times.empty()) throw HorizonError("empty trace");
  switch (f.kind) {
    case StlKind::Atom: return atom_signal(f, tr);
    case StlKind::Not: return negate(robustness_signal(*f.args[0], tr));
    case StlKind::And: return combine(robustness_signal(*f.args[0], tr), robustness_signal(*f.args[1], tr), false);
    case StlKind::Or: return combine(robustness_signal(*f.args[0], tr), robustness_signal(*f.args[1], tr), true);
    case StlKind::Implies:
      return combine(negate(robustness_signal(*f.args[0], tr)), robustness_signal(*f.args[1], tr), true);
    case StlKind::Always: return always(robustness_signal(*f.args[0], tr), f.a, f.b);
    case StlKind::Eventually: return eventually(robustness_signal(*f.args[0], tr), f.a, f.b);
    case StlKind::Until:
      return until(robustness_signal(*f.args[0], tr), robustness_signal(*f.args[1], tr), f.a, f.b);
  }
  throw Error("unhandled formula");
}

double robustness(const StlFormula& f, const Trace& tr) {
  if (tr.times.empty()) throw HorizonError("empty trace");
  const double span = tr.times.back() - tr.times.front();
  if (f.horizon() > span) {
    throw HorizonError("formula horizon " + format_number(f.horizon()) + " s exceeds the trace length " +
                       format_number(span) + " s");
  }
  return robustness_signal(f, tr).v.front();
}

double signal_scale(const StlFormula& f, const Trace& tr) {
  double s = 0.0;
  if (f.kind == StlKind::Atom) {
    std::vector<std::size_t> cols;
    for (const auto& n : f.signals) {
      auto it = std::find(tr.names.begin(), tr.names.end(), n);
      cols.push_back(it == tr.names.end() ? SIZE_MAX : static_cast<std::size_t>(it - tr.names.begin()));
    }
    for (const auto& row : tr.values) {
      auto leaf = [&](NodeKind, int index, const std::string& name) {
        if (cols[index] == SIZE_MAX) throw StructuralError("trace has no signal '" + name + "'");
        return row[cols[index]];
      };
      s = std::max({s, std::abs(evaluate<double>(f.lhs, leaf)), std::abs(evaluate<double>(f.rhs, leaf))});
    }
  }
  for (const auto& a : f.args) s = std::max(s, signal_scale(*a, tr));
  return s;
}

StlVerdict satisfies(const StlFormula& f, const Trace& tr) {
  StlVerdict v;
  v.robustness = robustness(f, tr);
  v.satisfied = v.robustness > 0.0;
  v.marginal = std::abs(v.robustness) < 1e-12 * signal_scale(f, tr);
  return v;
}

}  // namespace steadyscan
