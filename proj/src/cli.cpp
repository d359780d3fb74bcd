#include "steadyscan/cli.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "steadyscan/explain.hpp"
#include "steadyscan/iron_model.hpp"
#include "steadyscan/ode_sim.hpp"
#include "steadyscan/propagate.hpp"
#include "steadyscan/sampler.hpp"
#include "steadyscan/stl.hpp"

namespace steadyscan {
namespace {

namespace fs = std::filesystem;

class UsageError : public Error {
public:
  using Error::Error;
};

// A numeric setting: flag, then environment, then model option, then default.
struct Setting {
  std::string key;
  double value = 0.0;
  CLI::Option* flag = nullptr;

  double resolve(const Model* m, double fallback) const {
    if (flag != nullptr && flag->count() > 0) return value;
    std::string env = "STEADYSCAN_";
    for (char c : key) env += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (const char* v = std::getenv(env.c_str())) {
      char* end = nullptr;
      const double x = std::strtod(v, &end);
      if (end == v || *end != '\0') throw UsageError(env + " is not a number: '" + v + "'");
      return x;
    }
    return m != nullptr ? m->option(key, fallback) : fallback;
  }
};

Setting& add_setting(CLI::App* app, std::deque<Setting>& store, const std::string& key, const std::string& help) {
  store.push_back({key, 0.0, nullptr});
  std::string flag = "--";
  for (char c : key) flag += c == '_' ? '-' : c;
  store.back().flag = app->add_option(flag, store.back().value, help);
  return store.back();
}

std::size_t as_count(double v, const std::string& what) {
  if (!(v >= 0) || v != std::floor(v) || v > 1e15) throw UsageError(what + " must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

// Artifact locations; each defaults to a fixed name inside --out-dir.
struct Paths {
  std::string out_dir = ".";
  std::string boxes, solutions, stats, report, trace_csv, trace_json, svg, dynamics, contracted;

  std::string get(const std::string& p, const std::string& fallback) const {
    return p.empty() ? (fs::path(out_dir) / fallback).string() : p;
  }
};

void add_path(CLI::App* app, std::string& target, const std::string& flag, const std::string& what) {
  app->add_option(flag, target, what + " (default: <out-dir>/" + flag.substr(2) + ")");
}

std::ofstream open_out(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(path);
  if (!os) throw UsageError("cannot write '" + path + "'");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot read '" + path + "'");
  return is;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// Fraction of the domain covered, as a product of per-dimension ratios so
// that 44 tiny widths do not underflow.
double volume_fraction(const Box& b, const Box& domain) {
  double f = 1.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double w = domain[i].width();
    if (w > 0.0) f *= b[i].width() / w;
  }
  return f;
}

struct Session {
  std::ostream& out;
  std::ostream& err;
  Paths paths;
  std::deque<Setting> settings;  // CLI11 holds pointers into it
  int jobs_flag = 0;
  CLI::Option* jobs_opt = nullptr;

  const Setting& setting(const std::string& key) const {
    for (const auto& s : settings) {
      if (s.key == key) return s;
    }
    throw Error("no setting '" + key + "'");
  }
  double get(const std::string& key, const Model* m, double fallback) const {
    return setting(key).resolve(m, fallback);
  }
  int jobs(const Model* m) const {
    Setting s{"jobs", static_cast<double>(jobs_flag), jobs_opt};
    const double j = s.resolve(m, 1.0);
    if (j < 1 || j != std::floor(j)) throw UsageError("--jobs must be a positive integer");
    return static_cast<int>(j);
  }
};

Model open_model(const std::string& path) { return load_model(path); }

// contract -----------------------------------------------------------------

int report_conflicts(Session& s, const Model& m) {
  ExplainOptions opt;
  opt.max_sets = as_count(s.get("max_sets", &m, 32), "--max-sets");
  const ConflictReport r = min_conflict_sets(m.constraints, m.domain_box(), opt);
  s.out << render_report(r, m.constraints);
  const std::string path = s.paths.get(s.paths.report, "conflicts.json");
  nlohmann::ordered_json j = to_json(r);
  nlohmann::ordered_json rel = nlohmann::ordered_json::object();
  for (const auto& c : m.constraints) {
    if (!c.reliability.empty()) rel[c.id] = c.reliability;
  }
  j["reliability"] = rel;
  open_out(path) << j.dump(2) << '\n';
  s.out << "conflict report: " << path << '\n';
  return r.consistent ? kExitOk : kExitInconsistent;
}

Box contract(Session& s, const Model& m, bool print) {
  const Box domain = m.domain_box();
  const Box b = propagate_fixpoint(m.constraints, domain);
  if (b.is_empty()) {
    s.out << "contraction emptied the box: the constraints of '" << m.name << "' are inconsistent\n";
    return b;
  }
  {
    BoxUnion u;
    u.push_back(b);
    const std::string path = s.paths.get(s.paths.contracted, "contracted.jsonl");
    auto os = open_out(path);
    write_jsonl(os, u);
  }
  if (print) {
    s.out << std::left << std::setw(16) << "unknown" << std::setw(30) << "contracted" << "domain\n";
    for (std::size_t i = 0; i < b.size(); ++i) {
      std::ostringstream now, was;
      now << '[' << num(b[i].lo()) << ", " << num(b[i].hi()) << ']';
      was << '[' << num(domain[i].lo()) << ", " << num(domain[i].hi()) << ']';
      s.out << std::left << std::setw(16) << b.space()->name(i) << std::setw(30) << now.str() << was.str()
            << (b[i] == domain[i] ? "" : "  *") << '\n';
    }
    s.out << std::right;
  }
  s.out << "volume fraction after contraction: " << num(volume_fraction(b, domain)) << '\n';
  return b;
}

int cmd_contract(Session& s, const std::string& model) {
  const Model m = open_model(model);
  const Box b = contract(s, m, true);
  if (b.is_empty()) return report_conflicts(s, m);
  return kExitOk;
}

// pave ---------------------------------------------------------------------

BoxUnion do_pave(Session& s, const Model& m) {
  PaveOptions opt;
  opt.precision = s.get("precision", &m, 1e-2);
  opt.max_boxes = as_count(s.get("max_boxes", &m, static_cast<double>(kDefaultMaxBoxes)), "--max-boxes");
  opt.jobs = s.jobs(&m);
  const BoxUnion u = pave(m.constraints, m.domain_box(), opt);
  const std::size_t truncated = static_cast<std::size_t>(std::count(u.truncated.begin(), u.truncated.end(), true));
  double frac = 0.0;
  for (const auto& b : u.boxes) frac += volume_fraction(b, m.domain_box());
  const std::string path = s.paths.get(s.paths.boxes, "boxes.jsonl");
  auto os = open_out(path);
  write_jsonl(os, u);
  s.out << "paving: " << u.size() << " boxes (" << truncated << " stopped by the box budget), volume fraction "
        << num(frac) << "\nboxes: " << path << '\n';
  return u;
}

int cmd_pave(Session& s, const std::string& model) {
  const Model m = open_model(model);
  const BoxUnion u = do_pave(s, m);
  if (u.empty()) {
    s.out << "paving is empty: the constraints are inconsistent\n";
    return report_conflicts(s, m);
  }
  return kExitOk;
}

// sample -------------------------------------------------------------------

struct SampleFlags {
  std::optional<std::uint64_t> seed;
  std::string boxes_in;
  bool no_redundant = false;
  bool no_conditional = false;
  bool no_decompose = false;
};

std::uint64_t resolve_seed(const SampleFlags& f) {
  if (f.seed) return *f.seed;
  if (const char* v = std::getenv("STEADYSCAN_SEED")) {
    try {
      std::size_t used = 0;
      const auto x = std::stoull(v, &used);
      if (used == std::string(v).size()) return x;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("STEADYSCAN_SEED is not an integer: '") + v + "'");
  }
  throw UsageError("a seed is required (--seed N or STEADYSCAN_SEED); runs are only replayable with one");
}

SampleResult do_sample(Session& s, const Model& m, const BoxUnion& u, const SampleFlags& f) {
  SamplerOptions opt;
  opt.seed = resolve_seed(f);
  opt.target = as_count(s.get("target", &m, 1000), "--target");
  opt.budget = as_count(s.get("budget", &m, 100000), "--budget");
  opt.retries = static_cast<int>(as_count(s.get("retries", &m, 8), "--retries"));
  opt.jobs = s.jobs(&m);
  opt.use_redundant = !f.no_redundant;
  opt.conditional = !f.no_conditional;
  opt.decompose = !f.no_decompose;
  const SampleResult r = sample_steady_states(m, u, opt);

  const std::string sol_path = s.paths.get(s.paths.solutions, "solutions.jsonl");
  {
    auto os = open_out(sol_path);
    write_solutions(os, r.solutions);
  }
  nlohmann::ordered_json j;
  j["model"] = m.name;
  j["seed"] = opt.seed;
  j["target"] = opt.target;
  j["budget"] = opt.budget;
  j["jobs"] = opt.jobs;
  j["budget_exhausted"] = r.budget_exhausted;
  j["sampling_order"] = r.sampling_order;
  j["stats"] = to_json(r.stats);
  const std::string stats_path = s.paths.get(s.paths.stats, "stats.json");
  open_out(stats_path) << j.dump(2) << '\n';

  s.out << "solutions: " << r.solutions.size() << " of " << opt.target << " after " << r.stats.attempts
        << " attempts (" << num(r.stats.wall_seconds) << " s)\n";
  const auto ranking = difficulty_ranking(r.stats.constraints);
  if (!ranking.empty()) {
    s.out << "hardest constraints (violated/checked):\n";
    for (std::size_t i = 0; i < ranking.size() && i < 5; ++i) {
      s.out << "  " << std::left << std::setw(24) << ranking[i].id << std::right << ranking[i].violated << '/'
            << ranking[i].checked << '\n';
    }
  }
  s.out << "solutions: " << sol_path << "\nstats: " << stats_path << '\n';
  if (r.budget_exhausted) s.out << "attempt budget exhausted before the target was reached\n";
  return r;
}

BoxUnion read_boxes(const std::string& path, const Model& m) {
  auto is = open_in(path);
  return read_jsonl(is, m.space());
}

int cmd_sample(Session& s, const std::string& model, const SampleFlags& f) {
  const Model m = open_model(model);
  BoxUnion u;
  if (!f.boxes_in.empty()) {
    u = read_boxes(f.boxes_in, m);
  } else {
    u.push_back(m.domain_box());
  }
  if (u.empty()) {
    s.out << "the search space is empty\n";
    return report_conflicts(s, m);
  }
  const SampleResult r = do_sample(s, m, u, f);
  return r.budget_exhausted ? kExitBudget : kExitOk;
}

// simulate -----------------------------------------------------------------

struct SimFlags {
  std::string solutions_in;
  std::size_t index = 0;
  bool no_events = false;
};

Solution pick_solution(const std::string& path, std::size_t index, const Model& m) {
  auto is = open_in(path);
  const auto sols = read_solutions(is, m);
  if (index >= sols.size()) {
    throw UsageError("solution index " + std::to_string(index) + " out of range (" + path + " holds " +
                     std::to_string(sols.size()) + ")");
  }
  return sols[index];
}

void write_trace(Session& s, const Trace& t, const std::string& title) {
  const std::string csv = s.paths.get(s.paths.trace_csv, "trace.csv");
  const std::string json = s.paths.get(s.paths.trace_json, "trace.json");
  const std::string svg = s.paths.get(s.paths.svg, "trace.svg");
  {
    auto os = open_out(csv);
    write_csv(os, t);
  }
  open_out(json) << to_json(t).dump() << '\n';
  {
    auto os = open_out(svg);
    write_svg(os, t, title);
  }
  s.out << "trace: " << csv << ", " << json << ", " << svg << '\n';
}

int cmd_simulate(Session& s, const std::string& model, const SimFlags& f) {
  const Model m = open_model(model);
  const Solution sol = pick_solution(f.solutions_in, f.index, m);
  const auto y0 = steady_state_vector(m, sol.assignment);
  const StabilityResult st = stability_check(m, sol.assignment, y0);
  s.out << "steady state of attempt " << sol.attempt << ": " << to_string(st.kind)
        << " (largest eigenvalue real part " << num(st.max_real) << ")\n";
  const double horizon = s.get("horizon", &m, simulation_horizon(m));
  const auto events = f.no_events ? std::vector<TimedEvent>{} : resolve_events(m, sol.assignment);
  const Trace t = simulate(m, sol.assignment, y0, horizon, events);
  s.out << "simulated " << num(horizon) << " s in " << t.size() << " steps with " << t.method;
  for (const auto& [time, label] : t.events) s.out << "; event " << label << " at " << num(time) << " s";
  s.out << '\n';
  for (const auto& w : t.warnings) s.err << "warning: " << w << '\n';
  write_trace(s, t, m.name + " attempt " + std::to_string(sol.attempt));
  return kExitOk;
}

// check --------------------------------------------------------------------

struct CheckFlags {
  std::string trace_in;
  std::string stl_file;
  std::string formula;
  std::string model;
  std::string solutions_in;
  std::size_t index = 0;
  std::vector<std::string> constants;
};

Trace load_trace(const std::string& path) {
  auto is = open_in(path);
  if (fs::path(path).extension() == ".json") return trace_from_json(nlohmann::json::parse(is));
  return read_csv(is);
}

std::string read_stl_file(const std::string& path) {
  auto is = open_in(path);
  std::string text, line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    text += line + ' ';
  }
  return text;
}

int cmd_check(Session& s, const CheckFlags& f) {
  const Trace t = load_trace(f.trace_in);
  std::map<std::string, double> constants;
  std::optional<Model> m;
  if (!f.model.empty()) {
    m = open_model(f.model);
    if (!f.solutions_in.empty()) {
      const Solution sol = pick_solution(f.solutions_in, f.index, *m);
      for (std::size_t i = 0; i < m->unknowns.size(); ++i) {
        if (sol.assignment.has(i)) constants[m->unknowns[i].name] = sol.assignment.value(i);
      }
    }
  }
  for (const auto& kv : f.constants) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--const expects name=value, got '" + kv + "'");
    try {
      constants[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("--const value is not a number: '" + kv + "'");
    }
  }
  std::string text = f.formula;
  if (text.empty() && !f.stl_file.empty()) text = read_stl_file(f.stl_file);
  if (text.empty() && m) text = m->stl_spec;
  if (text.empty()) throw UsageError("no formula: give --stl FILE, --formula TEXT or a model with an stl: line");
  const StlFormula formula = parse_stl(text, t.names, constants);
  const StlVerdict v = satisfies(formula, t);
  s.out << (v.satisfied ? "satisfied" : "violated") << " robustness=" << std::setprecision(9) << v.robustness
        << std::setprecision(6) << (v.marginal ? " (marginal: within rounding of zero)" : "") << '\n';
  return v.satisfied ? kExitOk : kExitViolated;
}

// pipeline -----------------------------------------------------------------

int cmd_pipeline(Session& s, const std::string& model, const SampleFlags& f) {
  const Model m = open_model(model);
  s.out << "== contract\n";
  const Box b = contract(s, m, false);
  if (b.is_empty()) {
    s.out << "== explain\n";
    return report_conflicts(s, m);
  }
  s.out << "== pave\n";
  const BoxUnion u = do_pave(s, m);
  if (u.empty()) {
    s.out << "== explain\n";
    return report_conflicts(s, m);
  }
  s.out << "== sample\n";
  const SampleResult r = do_sample(s, m, u, f);

  s.out << "== simulate and check\n";
  const std::size_t n = std::min(r.solutions.size(), as_count(s.get("dynamics", &m, 100), "--dynamics"));
  const double horizon = s.get("horizon", &m, simulation_horizon(m));
  const std::string dyn_path = s.paths.get(s.paths.dynamics, "dynamics.jsonl");
  auto dyn = open_out(dyn_path);
  std::size_t stable = 0, stable_ok = 0, failed = 0;
  std::vector<std::uint64_t> violating;
  for (std::size_t i = 0; i < n; ++i) {
    const Solution& sol = r.solutions[i];
    nlohmann::ordered_json j;
    j["attempt"] = sol.attempt;
    try {
      const auto y0 = steady_state_vector(m, sol.assignment);
      const StabilityResult st = stability_check(m, sol.assignment, y0);
      j["stability"] = to_string(st.kind);
      j["max_real"] = st.max_real;
      const Trace t = simulate(m, sol.assignment, y0, horizon, resolve_events(m, sol.assignment));
      if (i == 0) write_trace(s, t, m.name + " attempt " + std::to_string(sol.attempt));
      j["method"] = t.method;
      if (!m.stl_spec.empty()) {
        const StlVerdict v = satisfies(model_stl(m, sol.assignment), t);
        j["satisfied"] = v.satisfied;
        j["robustness"] = v.robustness;
        j["marginal"] = v.marginal;
        if (st.kind == StabilityKind::Stable) {
          ++stable;
          if (v.satisfied) {
            ++stable_ok;
          } else {
            violating.push_back(sol.attempt);
          }
        }
      } else if (st.kind == StabilityKind::Stable) {
        ++stable;
      }
    } catch (const Error& e) {
      ++failed;
      j["error"] = e.what();
    }
    dyn << j.dump() << '\n';
  }
  s.out << "dynamics of " << n << " solutions: " << stable << " stable";
  if (!m.stl_spec.empty()) s.out << ", " << stable_ok << " of them satisfy the specification";
  if (failed > 0) s.out << ", " << failed << " simulation errors";
  s.out << "\n";
  if (!violating.empty()) {
    s.out << "violating attempts:";
    for (std::size_t i = 0; i < violating.size() && i < 20; ++i) s.out << ' ' << violating[i];
    s.out << (violating.size() > 20 ? " ..." : "") << '\n';
  }
  s.out << "dynamics: " << dyn_path << '\n';
  return r.budget_exhausted ? kExitBudget : kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"steadyscan: interval contraction, conflict explanation, steady-state sampling, simulation and STL checks"};
  app.name("steadyscan");
  app.require_subcommand(1);
  Session s{out, err, {}, {}, 0, nullptr};

  std::string model;
  SampleFlags sf;
  SimFlags mf;
  CheckFlags cf;

  auto model_arg = [&](CLI::App* c) {
    c->add_option("model", model, "model file, or a built-in name (" +
                                      [] {
                                        std::string n;
                                        for (const auto& x : builtin_model_names()) n += (n.empty() ? "" : ", ") + x;
                                        return n;
                                      }() + ")")
        ->required();
  };
  auto common = [&](CLI::App* c) {
    c->add_option("--out-dir", s.paths.out_dir, "directory for artifacts without an explicit path");
  };
  auto jobs = [&](CLI::App* c) {
    c->add_option("--jobs,-j", s.jobs_flag, "worker threads (STEADYSCAN_JOBS)");
  };

  auto* contract_cmd = app.add_subcommand("contract", "propagate the constraints and print the contracted box");
  model_arg(contract_cmd);
  common(contract_cmd);
  add_path(contract_cmd, s.paths.contracted, "--contracted", "contracted box JSONL");
  add_path(contract_cmd, s.paths.report, "--report", "conflict report JSON when inconsistent");
  add_setting(contract_cmd, s.settings, "max_sets", "conflict sets to enumerate");

  auto* pave_cmd = app.add_subcommand("pave", "cover the solution set with a union of boxes");
  model_arg(pave_cmd);
  common(pave_cmd);
  jobs(pave_cmd);
  add_setting(pave_cmd, s.settings, "precision", "split until widths are this fraction of the domain");
  add_setting(pave_cmd, s.settings, "max_boxes", "box budget");
  add_setting(pave_cmd, s.settings, "max_sets", "conflict sets to enumerate when empty");
  add_path(pave_cmd, s.paths.boxes, "--boxes", "BoxUnion JSONL");
  add_path(pave_cmd, s.paths.report, "--report", "conflict report JSON when inconsistent");

  auto* explain_cmd = app.add_subcommand("explain", "find the smallest sets of constraints to lift");
  model_arg(explain_cmd);
  common(explain_cmd);
  add_setting(explain_cmd, s.settings, "max_sets", "conflict sets to enumerate");
  add_path(explain_cmd, s.paths.report, "--report", "conflict report JSON");

  auto sampling = [&](CLI::App* c) {
    c->add_option("--seed", sf.seed, "random seed (required, or STEADYSCAN_SEED)");
    add_setting(c, s.settings, "target", "solutions wanted");
    add_setting(c, s.settings, "budget", "top-level attempts allowed");
    add_setting(c, s.settings, "retries", "retries per independent sub-problem");
    c->add_flag("--no-redundant", sf.no_redundant, "skip the derived redundant bounds");
    c->add_flag("--no-conditional", sf.no_conditional, "do not propagate between draws");
    c->add_flag("--no-decompose", sf.no_decompose, "do not split into independent sub-problems");
    add_path(c, s.paths.solutions, "--solutions", "Solutions JSONL");
    add_path(c, s.paths.stats, "--stats", "search statistics JSON");
    add_path(c, s.paths.report, "--report", "conflict report JSON when inconsistent");
  };

  auto* sample_cmd = app.add_subcommand("sample", "draw explicit steady states");
  model_arg(sample_cmd);
  common(sample_cmd);
  jobs(sample_cmd);
  sampling(sample_cmd);
  sample_cmd->add_option("--from-boxes", sf.boxes_in, "BoxUnion JSONL to sample from (default: the model domains)");
  add_setting(sample_cmd, s.settings, "max_sets", "conflict sets to enumerate when empty");

  auto* sim_cmd = app.add_subcommand("simulate", "simulate one sampled steady state under the model's events");
  model_arg(sim_cmd);
  common(sim_cmd);
  sim_cmd->add_option("--from-solutions", mf.solutions_in, "Solutions JSONL")->required();
  sim_cmd->add_option("--index", mf.index, "which solution (0-based)");
  sim_cmd->add_flag("--no-events", mf.no_events, "simulate without the model's events");
  add_setting(sim_cmd, s.settings, "horizon", "simulated seconds");
  add_path(sim_cmd, s.paths.trace_csv, "--csv", "trace CSV");
  add_path(sim_cmd, s.paths.trace_json, "--json", "trace JSON");
  add_path(sim_cmd, s.paths.svg, "--svg", "trace plot");

  auto* check_cmd = app.add_subcommand("check", "evaluate an STL formula on a trace");
  check_cmd->add_option("--trace", cf.trace_in, "trace CSV or JSON")->required();
  check_cmd->add_option("--stl", cf.stl_file, "file holding the formula ('#' starts a comment)");
  check_cmd->add_option("--formula", cf.formula, "formula text");
  check_cmd->add_option("--model", cf.model, "model whose stl: line is the default formula");
  check_cmd->add_option("--from-solutions", cf.solutions_in, "Solutions JSONL giving constants such as Fe_eq");
  check_cmd->add_option("--index", cf.index, "which solution (0-based)");
  check_cmd->add_option("--const", cf.constants, "extra constant name=value");

  auto* pipe_cmd = app.add_subcommand("pipeline", "contract, pave, sample, simulate and check; explain on inconsistency");
  model_arg(pipe_cmd);
  common(pipe_cmd);
  jobs(pipe_cmd);
  sampling(pipe_cmd);
  add_setting(pipe_cmd, s.settings, "precision", "paving precision");
  add_setting(pipe_cmd, s.settings, "max_boxes", "paving box budget");
  add_setting(pipe_cmd, s.settings, "max_sets", "conflict sets to enumerate");
  add_setting(pipe_cmd, s.settings, "dynamics", "solutions to simulate and check");
  add_setting(pipe_cmd, s.settings, "horizon", "simulated seconds");
  add_path(pipe_cmd, s.paths.contracted, "--contracted", "contracted box JSONL");
  add_path(pipe_cmd, s.paths.boxes, "--boxes", "BoxUnion JSONL");
  add_path(pipe_cmd, s.paths.dynamics, "--dynamics-out", "per-solution stability and STL verdicts");
  add_path(pipe_cmd, s.paths.trace_csv, "--csv", "trace CSV of the first solution");
  add_path(pipe_cmd, s.paths.trace_json, "--json", "trace JSON of the first solution");
  add_path(pipe_cmd, s.paths.svg, "--svg", "trace plot of the first solution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  // settings shared between subcommands: keep the one registered on the
  // subcommand that ran
  CLI::App* ran = app.get_subcommands().front();
  std::deque<Setting> active;
  const auto owned = ran->get_options();
  for (const auto& st : s.settings) {
    if (std::find(owned.begin(), owned.end(), st.flag) != owned.end()) active.push_back(st);
  }
  s.settings = active;
  for (auto* o : ran->get_options()) {
    if (o->check_lname("jobs")) s.jobs_opt = o;
  }

  try {
    if (ran == contract_cmd) return cmd_contract(s, model);
    if (ran == pave_cmd) return cmd_pave(s, model);
    if (ran == explain_cmd) return report_conflicts(s, open_model(model));
    if (ran == sample_cmd) return cmd_sample(s, model, sf);
    if (ran == sim_cmd) return cmd_simulate(s, model, mf);
    if (ran == check_cmd) return cmd_check(s, cf);
    if (ran == pipe_cmd) return cmd_pipeline(s, model, sf);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const nlohmann::json::exception& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const UsageError& e) {
    err << "usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace steadyscan
