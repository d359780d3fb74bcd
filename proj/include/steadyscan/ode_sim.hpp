#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "steadyscan/assignment.hpp"
#include "steadyscan/model.hpp"

namespace steadyscan {

/// Sampled trajectory: one row of state values per accepted step.
struct Trace {
  std::vector<std::string> names;
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // values[k][state]
  std::vector<std::pair<double, std::string>> events;
  /// Set when some concentration went negative beyond 1e-30 and was clamped.
  std::vector<std::string> warnings;
  /// Integrator that finished the run ("dopri5" or "rosenbrock23").
  std::string method = "dopri5";

  std::size_t size() const { return times.size(); }
  std::size_t index(const std::string& name) const;  // throws on unknown names
  std::vector<double> signal(const std::string& name) const;
  std::vector<double> at(std::size_t k) const { return values.at(k); }
};

/// Values of every model unknown, with events able to overwrite them. State
/// derivatives are evaluated from the ODE expressions exactly.
class OdeFunction {
public:
  OdeFunction(const Model& m, const Assignment& params);
  std::size_t dimension() const { return odes_.size(); }
  void operator()(const std::vector<double>& y, std::vector<double>& dy) const;
  std::vector<double> operator()(const std::vector<double>& y) const;
  void set_parameter(int index, double v) { params_.at(static_cast<std::size_t>(index)) = v; }
  double parameter(int index) const { return params_.at(static_cast<std::size_t>(index)); }

private:
  const Model* m_;
  std::vector<Expr> odes_;
  std::vector<double> params_;
};

/// Time derivative of every state. params must cover every parameter the
/// ODEs reference; a non-finite component raises NumericError naming the
/// state.
std::vector<double> rhs(const Model& m, const std::vector<double>& state, const Assignment& params);

/// State vector read from the steady-state unknowns (X_eq) of an assignment.
std::vector<double> steady_state_vector(const Model& m, const Assignment& a);

struct SimOptions {
  double rtol = 1e-7;
  double atol = 1e-15;
  /// Explicit steps per segment before switching to the implicit method.
  std::size_t max_explicit_steps = 50000;
  std::size_t max_steps = 2000000;
  /// Record at most one row per this many seconds (0 keeps every step).
  double min_output_interval = 0.0;
};

struct TimedEvent {
  std::string label;
  double time = 0.0;
  std::vector<std::pair<int, double>> assignments;  // unknown index -> value
};

/// Events of the model evaluated on params.
std::vector<TimedEvent> resolve_events(const Model& m, const Assignment& params);

/// Adaptive Dormand-Prince 5(4); on step-size collapse or an excessive step
/// count it continues with a Rosenbrock 2(3) method. Events are applied by
/// stopping exactly at their time and restarting with the new parameters.
Trace simulate(const Model& m, const Assignment& params, const std::vector<double>& init, double t_end,
               const std::vector<TimedEvent>& events, const SimOptions& opt = {});
Trace simulate(const Model& m, const Assignment& params, const std::vector<double>& init, double t_end);

enum class StabilityKind { Stable, Unstable, Marginal };
const char* to_string(StabilityKind k);

struct StabilityResult {
  StabilityKind kind = StabilityKind::Stable;
  double max_real = 0.0;
  std::vector<std::complex<double>> eigenvalues;
};

constexpr double kMarginalBand = 1e-12;

/// Central-difference Jacobian at `steady` (relative step 1e-6, floor 1e-18).
std::vector<std::vector<double>> jacobian(const Model& m, const Assignment& params, const std::vector<double>& steady);
StabilityResult stability_check(const Model& m, const Assignment& params, const std::vector<double>& steady);

void write_csv(std::ostream& os, const Trace& t);
Trace read_csv(std::istream& is);
nlohmann::ordered_json to_json(const Trace& t);
Trace trace_from_json(const nlohmann::json& j);
/// Static line chart, each state scaled by its own maximum.
void write_svg(std::ostream& os, const Trace& t, const std::string& title = "");

}  // namespace steadyscan
