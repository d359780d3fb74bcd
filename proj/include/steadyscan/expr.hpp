#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "steadyscan/errors.hpp"
#include "steadyscan/interval.hpp"

namespace steadyscan {

enum class NodeKind {
  Constant,
  Unknown,  // model unknown (parameter or steady-state concentration)
  State,    // ODE state variable; only appears in right-hand sides
  Neg,
  Abs,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Min,
  Max,
  SigmoidPlus,  // args: x, threshold, exponent
};

struct ExprNode {
  NodeKind kind = NodeKind::Constant;
  double value = 0.0;
  int index = -1;
  std::string name;
  std::vector<std::shared_ptr<const ExprNode>> args;
};

/// Immutable, cheaply copyable expression tree.
class Expr {
public:
  Expr() : Expr(constant(0.0)) {}

  static Expr constant(double v);
  static Expr unknown(int index, std::string name);
  static Expr state(int index, std::string name);
  static Expr unary(NodeKind kind, const Expr& a);
  static Expr binary(NodeKind kind, const Expr& a, const Expr& b);
  static Expr sigmoid(const Expr& x, const Expr& threshold, const Expr& exponent);

  const ExprNode& node() const { return *node_; }
  NodeKind kind() const { return node_->kind; }
  double value() const { return node_->value; }
  int index() const { return node_->index; }
  const std::string& name() const { return node_->name; }
  std::size_t arity() const { return node_->args.size(); }
  Expr arg(std::size_t i) const { return Expr(node_->args.at(i)); }

  bool is_constant() const { return kind() == NodeKind::Constant; }
  bool is_constant(double v) const { return is_constant() && value() == v; }

private:
  explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const ExprNode> node_;
};

inline Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(NodeKind::Add, a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(NodeKind::Sub, a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(NodeKind::Mul, a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(NodeKind::Div, a, b); }
inline Expr operator-(const Expr& a) { return Expr::unary(NodeKind::Neg, a); }
inline Expr abs(const Expr& a) { return Expr::unary(NodeKind::Abs, a); }
inline Expr pow(const Expr& a, const Expr& b) { return Expr::binary(NodeKind::Pow, a, b); }
inline Expr min(const Expr& a, const Expr& b) { return Expr::binary(NodeKind::Min, a, b); }
inline Expr max(const Expr& a, const Expr& b) { return Expr::binary(NodeKind::Max, a, b); }
inline Expr sigmoid_plus(const Expr& x, const Expr& theta, const Expr& n) { return Expr::sigmoid(x, theta, n); }

bool structurally_equal(const Expr& a, const Expr& b);

/// Infix rendering that the model parser reads back to an equal tree.
std::string to_string(const Expr& e);

/// Shortest decimal form that round-trips through strtod.
std::string format_number(double v);

/// Sorted, unique unknown indices referenced by e.
std::vector<int> unknown_refs(const Expr& e);
std::vector<int> state_refs(const Expr& e);
bool references_unknown(const Expr& e, int index);

/// Replaces every State(i) leaf by `replacement[i]`.
Expr substitute_states(const Expr& e, const std::vector<Expr>& replacement);

/// Top-level additive terms of e (signs folded into Neg nodes).
std::vector<Expr> additive_terms(const Expr& e);

/// e == coefficient * u + rest, with coefficient and rest free of u.
struct LinearForm {
  Expr coefficient;
  Expr rest;
};
std::optional<LinearForm> linear_split(const Expr& e, int unknown);

/// e == coefficient * u^exponent + rest, u occurring only inside that power.
struct PowerForm {
  Expr coefficient;
  Expr rest;
  int exponent = 1;
};
std::optional<PowerForm> isolated_power(const Expr& e, int unknown);

// Scalar-generic primitives used by evaluate().
inline double scalar_pow(double a, double b) { return real_pow(a, b); }
inline Interval scalar_pow(const Interval& a, const Interval& b) { return pow(a, b); }
inline double scalar_abs(double a) { return std::abs(a); }
inline Interval scalar_abs(const Interval& a) { return abs(a); }
inline double scalar_min(double a, double b) { return std::min(a, b); }
inline Interval scalar_min(const Interval& a, const Interval& b) { return min(a, b); }
inline double scalar_max(double a, double b) { return std::max(a, b); }
inline Interval scalar_max(const Interval& a, const Interval& b) { return max(a, b); }

/// Evaluates e over any scalar type with the arithmetic of double or
/// Interval. `leaf(kind, index, name)` supplies Unknown/State values.
template <class Scalar, class Leaf>
Scalar evaluate(const ExprNode& n, Leaf&& leaf) {
  auto arg = [&](std::size_t i) { return evaluate<Scalar>(*n.args[i], leaf); };
  switch (n.kind) {
    case NodeKind::Constant: return Scalar(n.value);
    case NodeKind::Unknown:
    case NodeKind::State: return leaf(n.kind, n.index, n.name);
    case NodeKind::Neg: return -arg(0);
    case NodeKind::Abs: return scalar_abs(arg(0));
    case NodeKind::Add: return arg(0) + arg(1);
    case NodeKind::Sub: return arg(0) - arg(1);
    case NodeKind::Mul: return arg(0) * arg(1);
    case NodeKind::Div: return arg(0) / arg(1);
    case NodeKind::Pow: return scalar_pow(arg(0), arg(1));
    case NodeKind::Min: return scalar_min(arg(0), arg(1));
    case NodeKind::Max: return scalar_max(arg(0), arg(1));
    case NodeKind::SigmoidPlus: return sigmoid_plus(arg(0), arg(1), arg(2));
  }
  return Scalar(0.0);
}

template <class Scalar, class Leaf>
Scalar evaluate(const Expr& e, Leaf&& leaf) {
  return evaluate<Scalar>(e.node(), std::forward<Leaf>(leaf));
}

}  // namespace steadyscan
