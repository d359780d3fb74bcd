#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "steadyscan/expr.hpp"
#include "steadyscan/ode_sim.hpp"

namespace steadyscan {

enum class StlKind { Atom, Not, And, Or, Implies, Always, Eventually, Until };

/// Signal temporal logic formula. Atoms compare two arithmetic expressions
/// over trace signals (State leaves indexed into `signals`) and constants.
struct StlFormula {
  StlKind kind = StlKind::Atom;
  // atoms
  Expr lhs;
  Expr rhs;
  std::string op;  // "<", "<=", ">", ">="
  // temporal bounds in seconds
  double a = 0.0;
  double b = 0.0;
  std::vector<std::shared_ptr<const StlFormula>> args;
  std::vector<std::string> signals;  // names behind State leaves

  /// Time the formula looks ahead of its evaluation instant.
  double horizon() const;
};

/// Grammar, loosest binding first:
///   f := g ('->' f)?
///   g := h (('or' | '||') h)*
///   h := u (('and' | '&&') u)*
///   u := w ('until' '[' a ',' b ']' w)?
///   w := ('not' | '!') w | ('always' | 'eventually') '[' a ',' b ']' w | '(' f ')' | expr relop expr
/// Names must be in `signals` or `constants`; constants are substituted.
StlFormula parse_stl(const std::string& text, const std::vector<std::string>& signals,
                     const std::map<std::string, double>& constants = {});
std::string to_string(const StlFormula& f);

/// The model's `stl:` specification over its states, with every assigned
/// unknown (e.g. Fe_eq) available as a constant.
StlFormula model_stl(const Model& m, const Assignment& a);

/// Piecewise-linear signal on [t.front(), t.back()].
struct PlSignal {
  std::vector<double> t;
  std::vector<double> v;
  double at(double time) const;
};

/// Robustness of every sub-formula as a signal over time.
PlSignal robustness_signal(const StlFormula& f, const Trace& tr);

/// Robustness at the first trace instant. HorizonError when the trace is
/// shorter than the formula's horizon.
double robustness(const StlFormula& f, const Trace& tr);

struct StlVerdict {
  bool satisfied = false;
  double robustness = 0.0;
  /// |robustness| below 1e-12 of the signal scale: the sign is not reliable.
  bool marginal = false;
};

/// Largest absolute value over the trace of the signals the formula reads.
double signal_scale(const StlFormula& f, const Trace& tr);
StlVerdict satisfies(const StlFormula& f, const Trace& tr);

}  // namespace steadyscan
