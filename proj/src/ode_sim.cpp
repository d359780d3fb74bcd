#include "steadyscan/ode_sim.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace steadyscan {

std::size_t Trace::index(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw StructuralError("trace has no signal '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

std::vector<double> Trace::signal(const std::string& name) const {
  const std::size_t i = index(name);
  std::vector<double> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) out[k] = values[k][i];
  return out;
}

OdeFunction::OdeFunction(const Model& m, const Assignment& params) : m_(&m), odes_(m.odes) {
  params_.assign(m.unknowns.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < m.unknowns.size() && i < params.size(); ++i) {
    if (params.has(i)) params_[i] = params.value(i);
  }
  for (const auto& e : odes_) {
    for (int u : unknown_refs(e)) {
      if (std::isnan(params_[u])) throw MissingValueError(m.unknowns[u].name);
    }
  }
}

void OdeFunction::operator()(const std::vector<double>& y, std::vector<double>& dy) const {
  dy.resize(odes_.size());
  auto leaf = [&](NodeKind kind, int index, const std::string&) {
    return kind == NodeKind::State ? y[index] : params_[index];
  };
  for (std::size_t i = 0; i < odes_.size(); ++i) {
    dy[i] = evaluate<double>(odes_[i], leaf);
    if (!std::isfinite(dy[i])) throw NumericError("non-finite derivative", m_->states[i]);
  }
}

std::vector<double> OdeFunction::operator()(const std::vector<double>& y) const {
  std::vector<double> dy;
  (*this)(y, dy);
  return dy;
}

std::vector<double> rhs(const Model& m, const std::vector<double>& state, const Assignment& params) {
  if (state.size() != m.states.size()) throw StructuralError("state vector has the wrong dimension");
  return OdeFunction(m, params)(state);
}

std::vector<double> steady_state_vector(const Model& m, const Assignment& a) {
  std::vector<double> y(m.states.size());
  for (std::size_t s = 0; s < m.states.size(); ++s) {
    auto u = m.steady_unknown(static_cast<int>(s));
    if (!u) throw StructuralError("state '" + m.states[s] + "' has no steady-state unknown");
    if (!a.has(static_cast<std::size_t>(*u))) throw MissingValueError(m.unknowns[*u].name);
    y[s] = a.value(static_cast<std::size_t>(*u));
  }
  return y;
}

std::vector<TimedEvent> resolve_events(const Model& m, const Assignment& params) {
  std::vector<TimedEvent> out;
  for (const auto& e : m.events) {
    TimedEvent te;
    te.label = e.label;
    te.time = eval_point(e.time, params);
    for (const auto& [u, v] : e.assignments) te.assignments.emplace_back(u, eval_point(v, params));
    out.push_back(std::move(te));
  }
  return out;
}

namespace {

using Vec = std::vector<double>;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

class Integrator {
public:
  Integrator(OdeFunction& f, const SimOptions& opt, Trace& out) : f_(f), opt_(opt), out_(out), n_(f.dimension()) {}

  // Advances y from t0 to t1 exactly, recording accepted steps.
  void run(double t0, double t1, Vec& y) {
    if (!(t1 > t0)) return;
    double t = t0;
    double h = initial_step(t0, t1, y);
    std::size_t steps = 0;
    Vec dy;
    f_(y, dy);
    while (t < t1) {
      if (++total_steps_ > opt_.max_steps) throw StiffnessError("step budget exhausted at t=" + format_number(t));
      const bool last = t + h >= t1 || t1 - (t + h) < 1e-12 * std::max(1.0, std::abs(t1));
      const double step = last ? t1 - t : h;
      double err = 0.0;
      Vec ynew;
      if (implicit_) {
        err = rosenbrock(y, dy, step, ynew);
      } else {
        err = dopri(y, dy, step, ynew);
        ++steps;
      }
      if (err <= 1.0) {
        t = last ? t1 : t + step;
        y = std::move(ynew);
        clamp(y);
        f_(y, dy);
        record(t, y, last);
      }
      const double order = implicit_ ? 3.0 : 5.0;
      const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -1.0 / order), 0.2, 5.0);
      h = step * (err <= 1.0 ? fac : std::min(fac, 1.0));
      const double floor = 1e-14 * std::max(1.0, std::abs(t));
      if (h < floor || (!implicit_ && steps > opt_.max_explicit_steps)) {
        if (implicit_) {
          throw StiffnessError("step size underflow (h=" + format_number(h) + ") at t=" + format_number(t) +
                               " with the implicit method");
        }
        implicit_ = true;
        out_.method = "rosenbrock23";
        h = std::max(h, 1e-6 * (t1 - t));
      }
    }
  }

private:
  double scale(double a, double b) const { return opt_.atol + opt_.rtol * std::max(std::abs(a), std::abs(b)); }

  double initial_step(double t0, double t1, const Vec& y) {
    const Vec dy = f_(y);
    double d0 = 0.0;
    double d1 = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double sc = scale(y[i], y[i]);
      d0 = std::max(d0, std::abs(y[i]) / sc);
      d1 = std::max(d1, std::abs(dy[i]) / sc);
    }
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    return std::min(h, t1 - t0);
  }

  double dopri(const Vec& y, const Vec& k1, double h, Vec& ynew) {
    Vec tmp(n_), k2, k3, k4, k5, k6, k7;
    auto stage = [&](auto&& combine, Vec& k) {
      for (std::size_t i = 0; i < n_; ++i) tmp[i] = y[i] + h * combine(i);
      f_(tmp, k);
    };
    stage([&](std::size_t i) { return a21 * k1[i]; }, k2);
    stage([&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; }, k3);
    stage([&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; }, k4);
    stage([&](std::size_t i) { return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; }, k5);
    stage([&](std::size_t i) { return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]; }, k6);
    ynew.resize(n_);
    for (std::size_t i = 0; i < n_; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    f_(ynew, k7);
    double err = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      err = std::max(err, std::abs(e) / scale(y[i], ynew[i]));
    }
    return std::isfinite(err) ? err : 1e10;
  }

  // Shampine's L-stable Rosenbrock 2(3) pair for autonomous systems.
  double rosenbrock(const Vec& y, const Vec& f0, double h, Vec& ynew) {
    const double d = 1.0 / (2.0 + std::sqrt(2.0));
    const double e32 = 6.0 + std::sqrt(2.0);
    Eigen::MatrixXd J(n_, n_);
    Vec yp = y;
    Vec fp;
    for (std::size_t j = 0; j < n_; ++j) {
      const double dj = std::max(1.5e-8 * std::abs(y[j]), 1e-30);
      yp[j] = y[j] + dj;
      f_(yp, fp);
      for (std::size_t i = 0; i < n_; ++i) J(i, j) = (fp[i] - f0[i]) / dj;
      yp[j] = y[j];
    }
    const Eigen::MatrixXd W = Eigen::MatrixXd::Identity(n_, n_) - h * d * J;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(W);
    auto vec = [](const Vec& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); };
    const Eigen::VectorXd F0 = vec(f0);
    const Eigen::VectorXd k1 = lu.solve(F0);
    Vec mid(n_);
    for (std::size_t i = 0; i < n_; ++i) mid[i] = y[i] + 0.5 * h * k1(static_cast<Eigen::Index>(i));
    const Eigen::VectorXd F1 = vec(f_(mid));
    const Eigen::VectorXd k2 = lu.solve(F1 - k1) + k1;
    ynew.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) ynew[i] = y[i] + h * k2(static_cast<Eigen::Index>(i));
    const Eigen::VectorXd F2 = vec(f_(ynew));
    const Eigen::VectorXd k3 = lu.solve(F2 - e32 * (k2 - F1) - 2.0 * (k1 - F0));
    double err = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double e = h / 6.0 * (k1(ii) - 2.0 * k2(ii) + k3(ii));
      err = std::max(err, std::abs(e) / scale(y[i], ynew[i]));
    }
    return std::isfinite(err) ? err : 1e10;
  }

  void clamp(Vec& y) {
    for (std::size_t i = 0; i < n_; ++i) {
      if (y[i] >= 0.0) continue;
      if (y[i] < -1e-30 && !warned_[i]) {
        warned_[i] = true;
        out_.warnings.push_back("negative " + out_.names[i] + " (" + format_number(y[i]) + ") clamped to 0");
      }
      y[i] = 0.0;
    }
  }

  void record(double t, const Vec& y, bool force) {
    if (!force && opt_.min_output_interval > 0.0 && t - out_.times.back() < opt_.min_output_interval) return;
    if (t <= out_.times.back()) {
      out_.values.back() = y;
      return;
    }
    out_.times.push_back(t);
    out_.values.push_back(y);
  }

  OdeFunction& f_;
  const SimOptions& opt_;
  Trace& out_;
  std::size_t n_;
  bool implicit_ = false;
  std::size_t total_steps_ = 0;
  std::vector<bool> warned_ = std::vector<bool>(n_, false);
};

}  // namespace

Trace simulate(const Model& m, const Assignment& params, const std::vector<double>& init, double t_end,
               const std::vector<TimedEvent>& events, const SimOptions& opt) {
  if (init.size() != m.states.size()) throw StructuralError("initial state has the wrong dimension");
  for (double v : init) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("initial state must be finite and nonnegative");
  }
  if (!(t_end >= 0.0)) throw DomainError("simulation end time must be nonnegative");
  OdeFunction f(m, params);
  Trace tr;
  tr.names = m.states;
  tr.times.push_back(0.0);
  tr.values.push_back(init);
  std::vector<TimedEvent> evs = events;
  std::stable_sort(evs.begin(), evs.end(), [](const auto& a, const auto& b) { return a.time < b.time; });

  Vec y = init;
  double t = 0.0;
  Integrator integ(f, opt, tr);
  for (const auto& e : evs) {
    if (e.time > t_end) break;
    const double te = std::max(e.time, 0.0);
    integ.run(t, te, y);
    t = std::max(t, te);
    for (const auto& [u, v] : e.assignments) f.set_parameter(u, v);
    tr.events.emplace_back(t, e.label);
  }
  integ.run(t, t_end, y);
  return tr;
}

Trace simulate(const Model& m, const Assignment& params, const std::vector<double>& init, double t_end) {
  return simulate(m, params, init, t_end, resolve_events(m, params));
}

const char* to_string(StabilityKind k) {
  switch (k) {
    case StabilityKind::Stable: return "stable";
    case StabilityKind::Unstable: return "unstable";
    case StabilityKind::Marginal: return "marginal";
  }
  return "?";
}

std::vector<std::vector<double>> jacobian(const Model& m, const Assignment& params, const std::vector<double>& steady) {
  const OdeFunction f(m, params);
  const std::size_t n = steady.size();
  std::vector<std::vector<double>> J(n, std::vector<double>(n));
  Vec x = steady;
  for (std::size_t j = 0; j < n; ++j) {
    const double h = std::max(1e-6 * std::abs(steady[j]), 1e-18);
    x[j] = steady[j] + h;
    const Vec fp = f(x);
    x[j] = steady[j] - h;
    const Vec fm = f(x);
    x[j] = steady[j];
    for (std::size_t i = 0; i < n; ++i) {
      J[i][j] = (fp[i] - fm[i]) / (2.0 * h);
      if (!std::isfinite(J[i][j])) throw NumericError("non-finite Jacobian entry", m.states[i]);
    }
  }
  return J;
}

StabilityResult stability_check(const Model& m, const Assignment& params, const std::vector<double>& steady) {
  const auto J = jacobian(m, params, steady);
  const auto n = static_cast<Eigen::Index>(J.size());
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = J[i][j];
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  if (es.info() != Eigen::Success) throw NumericError("eigenvalue computation did not converge", "");
  StabilityResult r;
  r.max_real = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    r.eigenvalues.push_back(es.eigenvalues()(i));
    r.max_real = std::max(r.max_real, es.eigenvalues()(i).real());
  }
  std::sort(r.eigenvalues.begin(), r.eigenvalues.end(),
            [](const auto& a, const auto& b) { return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag(); });
  if (r.max_real < -kMarginalBand)
    r.kind = StabilityKind::Stable;
  else if (r.max_real > kMarginalBand)
    r.kind = StabilityKind::Unstable;
  else
    r.kind = StabilityKind::Marginal;
  return r;
}

void write_csv(std::ostream& os, const Trace& t) {
  for (const auto& [time, label] : t.events) os << "# event," << label << ',' << format_number(time) << '\n';
  os << "time";
  for (const auto& n : t.names) os << ',' << n;
  os << '\n';
  for (std::size_t k = 0; k < t.times.size(); ++k) {
    os << format_number(t.times[k]);
    for (double v : t.values[k]) os << ',' << format_number(v);
    os << '\n';
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

double parse_double(const std::string& s, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ParseError("not a number: '" + s + "'", line, 1);
  return v;
}

}  // namespace

Trace read_csv(std::istream& is) {
  Trace t;
  std::string line;
  int number = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line[0] == '#') {
      const auto cells = split_csv(line.substr(1));
      if (cells.size() == 3 && cells[0] == "event") t.events.emplace_back(parse_double(cells[2], number), cells[1]);
      continue;
    }
    auto cells = split_csv(line);
    if (!header) {
      if (cells.empty() || cells[0] != "time") throw ParseError("trace CSV must start with a 'time' column", number, 1);
      t.names.assign(cells.begin() + 1, cells.end());
      header = true;
      continue;
    }
    if (cells.size() != t.names.size() + 1) throw ParseError("row has the wrong number of columns", number, 1);
    const double time = parse_double(cells[0], number);
    if (!t.times.empty() && time < t.times.back()) throw ParseError("times must be nondecreasing", number, 1);
    std::vector<double> row;
    for (std::size_t i = 1; i < cells.size(); ++i) row.push_back(parse_double(cells[i], number));
    if (!t.times.empty() && time == t.times.back()) {
      t.values.back() = row;  // keep the latest value at a repeated time
      continue;
    }
    t.times.push_back(time);
    t.values.push_back(std::move(row));
  }
  if (!header) throw ParseError("empty trace", number, 1);
  return t;
}

nlohmann::ordered_json to_json(const Trace& t) {
  nlohmann::ordered_json j;
  j["names"] = t.names;
  j["times"] = t.times;
  j["values"] = t.values;
  nlohmann::ordered_json ev = nlohmann::ordered_json::array();
  for (const auto& [time, label] : t.events) ev.push_back({{"time", time}, {"label", label}});
  j["events"] = ev;
  j["method"] = t.method;
  j["warnings"] = t.warnings;
  return j;
}

Trace trace_from_json(const nlohmann::json& j) {
  Trace t;
  t.names = j.at("names").get<std::vector<std::string>>();
  t.times = j.at("times").get<std::vector<double>>();
  t.values = j.at("values").get<std::vector<std::vector<double>>>();
  if (t.values.size() != t.times.size()) throw StructuralError("trace times and values differ in length");
  if (j.contains("events")) {
    for (const auto& e : j["events"]) t.events.emplace_back(e.at("time").get<double>(), e.at("label").get<std::string>());
  }
  t.method = j.value("method", std::string("dopri5"));
  return t;
}

void write_svg(std::ostream& os, const Trace& t, const std::string& title) {
  constexpr double W = 900, H = 480, left = 60, right = 170, top = 40, bottom = 50;
  const double pw = W - left - right;
  const double ph = H - top - bottom;
  const double t0 = t.times.empty() ? 0.0 : t.times.front();
  const double t1 = t.times.empty() ? 1.0 : std::max(t.times.back(), t0 + 1e-300);
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                  "#bcbd22", "#17becf", "#393b79", "#637939", "#8c6d31", "#843c39", "#7b4173"};
  auto x_of = [&](double time) { return left + pw * (time - t0) / (t1 - t0); };
  auto y_of = [&](double frac) { return top + ph * (1.0 - frac / 1.05); };
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) os << "<text x=\"" << left << "\" y=\"24\" font-size=\"15\">" << title << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double frac = k / 4.0;
    os << "<text x=\"" << left - 8 << "\" y=\"" << y_of(frac) + 4 << "\" text-anchor=\"end\">" << frac << "</text>\n";
    const double time = t0 + (t1 - t0) * frac;
    os << "<text x=\"" << x_of(time) << "\" y=\"" << H - bottom + 18 << "\" text-anchor=\"middle\">"
       << format_number(std::round(time * 1e3) / 1e3) << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">time (s)</text>\n";
  os << "<text x=\"16\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 16 " << top + ph / 2
     << ")\" text-anchor=\"middle\">value / max</text>\n";
  for (const auto& [time, label] : t.events) {
    os << "<line x1=\"" << x_of(time) << "\" y1=\"" << top << "\" x2=\"" << x_of(time) << "\" y2=\"" << top + ph
       << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (std::size_t i = 0; i < t.names.size(); ++i) {
    double peak = 0.0;
    for (const auto& row : t.values) peak = std::max(peak, std::abs(row[i]));
    if (peak == 0.0) peak = 1.0;
    const char* colour = palette[i % (sizeof(palette) / sizeof(palette[0]))];
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < t.times.size(); ++k) os << x_of(t.times[k]) << ',' << y_of(t.values[k][i] / peak) << ' ';
    os << "\"/>\n";
    const double ly = top + 14.0 * static_cast<double>(i) + 8;
    os << "<line x1=\"" << W - right + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - right + 32 << "\" y2=\"" << ly
       << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - right + 38 << "\" y=\"" << ly + 4 << "\">" << t.names[i] << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace steadyscan
