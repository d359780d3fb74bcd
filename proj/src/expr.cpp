#include "steadyscan/expr.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <set>

namespace steadyscan {

namespace {

std::shared_ptr<ExprNode> make_node(NodeKind kind) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  return n;
}

// Folding constructors for derived expressions (not used by the parser, so
// round-tripped trees keep their written shape).
Expr fold_neg(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.value());
  if (a.kind() == NodeKind::Neg) return a.arg(0);
  return -a;
}

Expr fold_add(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() + b.value());
  return a + b;
}

Expr fold_sub(const Expr& a, const Expr& b) {
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return fold_neg(b);
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() - b.value());
  return a - b;
}

Expr fold_mul(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return fold_neg(b);
  if (b.is_constant(-1.0)) return fold_neg(a);
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() * b.value());
  return a * b;
}

Expr fold_div(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0)) return a;
  if (b.is_constant(1.0)) return a;
  return a / b;
}

void collect_refs(const ExprNode& n, NodeKind kind, std::set<int>& out) {
  if (n.kind == kind) out.insert(n.index);
  for (const auto& a : n.args) collect_refs(*a, kind, out);
}

int precedence(const ExprNode& n) {
  switch (n.kind) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    case NodeKind::Neg: return 3;
    case NodeKind::Pow: return 4;
    default: return 5;
  }
}

void print(const ExprNode& n, std::string& out);

void print_child(const ExprNode& child, bool parens, std::string& out) {
  if (parens) out += '(';
  print(child, out);
  if (parens) out += ')';
}

void print(const ExprNode& n, std::string& out) {
  const int p = precedence(n);
  switch (n.kind) {
    case NodeKind::Constant:
      if (n.value < 0.0) {
        out += '(' + format_number(n.value) + ')';
      } else {
        out += format_number(n.value);
      }
      return;
    case NodeKind::Unknown:
    case NodeKind::State: out += n.name; return;
    case NodeKind::Neg:
      out += '-';
      print_child(*n.args[0], precedence(*n.args[0]) < 4, out);
      return;
    case NodeKind::Abs:
    case NodeKind::Min:
    case NodeKind::Max:
    case NodeKind::SigmoidPlus: {
      out += n.kind == NodeKind::Abs ? "abs(" : n.kind == NodeKind::Min ? "min(" : n.kind == NodeKind::Max ? "max(" : "sigp(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        print(*n.args[i], out);
      }
      out += ')';
      return;
    }
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div: {
      const char op = n.kind == NodeKind::Add ? '+' : n.kind == NodeKind::Sub ? '-' : n.kind == NodeKind::Mul ? '*' : '/';
      print_child(*n.args[0], precedence(*n.args[0]) < p, out);
      out += p == 1 ? std::string(" ") + op + " " : std::string(1, op);
      print_child(*n.args[1], precedence(*n.args[1]) <= p, out);
      return;
    }
    case NodeKind::Pow:
      print_child(*n.args[0], precedence(*n.args[0]) <= p, out);
      out += '^';
      print_child(*n.args[1], precedence(*n.args[1]) < p, out);
      return;
  }
}

using Target = std::function<bool(const ExprNode&)>;

struct Split {
  Expr a;
  Expr b;
};

bool contains_target(const ExprNode& n, const Target& is_target, int unknown) {
  if (is_target(n)) return true;
  if (n.kind == NodeKind::Unknown && n.index == unknown) return true;
  return std::any_of(n.args.begin(), n.args.end(),
                     [&](const auto& a) { return contains_target(*a, is_target, unknown); });
}

// Writes e as a * T + b for the target sub-pattern T; u must not occur
// outside T.
std::optional<Split> split_on(const Expr& e, const Target& is_target, int unknown) {
  if (!contains_target(e.node(), is_target, unknown)) return Split{Expr::constant(0.0), e};
  if (is_target(e.node())) return Split{Expr::constant(1.0), Expr::constant(0.0)};
  switch (e.kind()) {
    case NodeKind::Neg: {
      auto r = split_on(e.arg(0), is_target, unknown);
      if (!r) return std::nullopt;
      return Split{fold_neg(r->a), fold_neg(r->b)};
    }
    case NodeKind::Add:
    case NodeKind::Sub: {
      auto l = split_on(e.arg(0), is_target, unknown);
      auto r = split_on(e.arg(1), is_target, unknown);
      if (!l || !r) return std::nullopt;
      if (e.kind() == NodeKind::Add) return Split{fold_add(l->a, r->a), fold_add(l->b, r->b)};
      return Split{fold_sub(l->a, r->a), fold_sub(l->b, r->b)};
    }
    case NodeKind::Mul: {
      const bool left_has = contains_target(e.arg(0).node(), is_target, unknown);
      const bool right_has = contains_target(e.arg(1).node(), is_target, unknown);
      if (left_has && right_has) return std::nullopt;
      const Expr factor = left_has ? e.arg(1) : e.arg(0);
      auto r = split_on(left_has ? e.arg(0) : e.arg(1), is_target, unknown);
      if (!r) return std::nullopt;
      return Split{fold_mul(factor, r->a), fold_mul(factor, r->b)};
    }
    case NodeKind::Div: {
      if (contains_target(e.arg(1).node(), is_target, unknown)) return std::nullopt;
      auto r = split_on(e.arg(0), is_target, unknown);
      if (!r) return std::nullopt;
      return Split{fold_div(r->a, e.arg(1)), fold_div(r->b, e.arg(1))};
    }
    default: return std::nullopt;
  }
}

std::optional<int> power_pattern(const ExprNode& n, int unknown) {
  if (n.kind == NodeKind::Pow && n.args[0]->kind == NodeKind::Unknown && n.args[0]->index == unknown &&
      n.args[1]->kind == NodeKind::Constant) {
    return as_small_integer(n.args[1]->value);
  }
  return std::nullopt;
}

// Exponents of every occurrence of u; bare occurrences count as 1, anything
// other than an integer-power pattern as 0.
void occurrence_exponents(const ExprNode& n, int unknown, std::vector<int>& out) {
  if (n.kind == NodeKind::Unknown && n.index == unknown) {
    out.push_back(1);
    return;
  }
  if (n.kind == NodeKind::Pow && n.args[0]->kind == NodeKind::Unknown && n.args[0]->index == unknown) {
    auto k = power_pattern(n, unknown);
    out.push_back(k.value_or(0));
    occurrence_exponents(*n.args[1], unknown, out);
    return;
  }
  for (const auto& a : n.args) occurrence_exponents(*a, unknown, out);
}

}  // namespace

Expr Expr::constant(double v) {
  auto n = make_node(NodeKind::Constant);
  n->value = v;
  return Expr(std::move(n));
}

Expr Expr::unknown(int index, std::string name) {
  auto n = make_node(NodeKind::Unknown);
  n->index = index;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::state(int index, std::string name) {
  auto n = make_node(NodeKind::State);
  n->index = index;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::unary(NodeKind kind, const Expr& a) {
  auto n = make_node(kind);
  n->args = {a.node_};
  return Expr(std::move(n));
}

Expr Expr::binary(NodeKind kind, const Expr& a, const Expr& b) {
  auto n = make_node(kind);
  n->args = {a.node_, b.node_};
  return Expr(std::move(n));
}

Expr Expr::sigmoid(const Expr& x, const Expr& threshold, const Expr& exponent) {
  auto n = make_node(NodeKind::SigmoidPlus);
  n->args = {x.node_, threshold.node_, exponent.node_};
  return Expr(std::move(n));
}

bool structurally_equal(const Expr& a, const Expr& b) {
  const ExprNode& x = a.node();
  const ExprNode& y = b.node();
  if (&x == &y) return true;
  if (x.kind != y.kind || x.args.size() != y.args.size()) return false;
  if (x.kind == NodeKind::Constant && x.value != y.value) return false;
  if ((x.kind == NodeKind::Unknown || x.kind == NodeKind::State) && (x.index != y.index || x.name != y.name)) return false;
  for (std::size_t i = 0; i < x.args.size(); ++i) {
    if (!structurally_equal(a.arg(i), b.arg(i))) return false;
  }
  return true;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string to_string(const Expr& e) {
  std::string out;
  print(e.node(), out);
  return out;
}

std::vector<int> unknown_refs(const Expr& e) {
  std::set<int> s;
  collect_refs(e.node(), NodeKind::Unknown, s);
  return {s.begin(), s.end()};
}

std::vector<int> state_refs(const Expr& e) {
  std::set<int> s;
  collect_refs(e.node(), NodeKind::State, s);
  return {s.begin(), s.end()};
}

bool references_unknown(const Expr& e, int index) {
  const ExprNode& n = e.node();
  if (n.kind == NodeKind::Unknown) return n.index == index;
  for (std::size_t i = 0; i < n.args.size(); ++i) {
    if (references_unknown(e.arg(i), index)) return true;
  }
  return false;
}

Expr substitute_states(const Expr& e, const std::vector<Expr>& replacement) {
  switch (e.kind()) {
    case NodeKind::State: return replacement.at(static_cast<std::size_t>(e.index()));
    case NodeKind::Constant:
    case NodeKind::Unknown: return e;
    case NodeKind::Neg:
    case NodeKind::Abs: return Expr::unary(e.kind(), substitute_states(e.arg(0), replacement));
    case NodeKind::SigmoidPlus:
      return Expr::sigmoid(substitute_states(e.arg(0), replacement), substitute_states(e.arg(1), replacement),
                           substitute_states(e.arg(2), replacement));
    default:
      return Expr::binary(e.kind(), substitute_states(e.arg(0), replacement), substitute_states(e.arg(1), replacement));
  }
}

std::vector<Expr> additive_terms(const Expr& e) {
  std::vector<Expr> out;
  std::function<void(const Expr&, bool)> walk = [&](const Expr& x, bool negate) {
    if (x.kind() == NodeKind::Add) {
      walk(x.arg(0), negate);
      walk(x.arg(1), negate);
    } else if (x.kind() == NodeKind::Sub) {
      walk(x.arg(0), negate);
      walk(x.arg(1), !negate);
    } else if (x.kind() == NodeKind::Neg) {
      walk(x.arg(0), !negate);
    } else {
      out.push_back(negate ? -x : x);
    }
  };
  walk(e, false);
  return out;
}

std::optional<LinearForm> linear_split(const Expr& e, int unknown) {
  Target is_u = [unknown](const ExprNode& n) { return n.kind == NodeKind::Unknown && n.index == unknown; };
  auto r = split_on(e, is_u, unknown);
  if (!r || r->a.is_constant(0.0)) return std::nullopt;
  return LinearForm{r->a, r->b};
}

std::optional<PowerForm> isolated_power(const Expr& e, int unknown) {
  std::vector<int> exps;
  occurrence_exponents(e.node(), unknown, exps);
  if (exps.empty()) return std::nullopt;
  const int k = exps.front();
  if (k == 0 || std::any_of(exps.begin(), exps.end(), [k](int x) { return x != k; })) return std::nullopt;
  if (k == 1) {
    auto lf = linear_split(e, unknown);
    if (!lf) return std::nullopt;
    return PowerForm{lf->coefficient, lf->rest, 1};
  }
  Target is_pow = [unknown, k](const ExprNode& n) {
    auto p = power_pattern(n, unknown);
    return p && *p == k;
  };
  auto r = split_on(e, is_pow, unknown);
  if (!r || r->a.is_constant(0.0)) return std::nullopt;
  return PowerForm{r->a, r->b, k};
}

}  // namespace steadyscan
