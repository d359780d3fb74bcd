// Acceptance run: one PASS/FAIL line per criterion with the measured
// quantities and wall time. Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "conflicts.hpp"
#include "generators.hpp"
#include "steadyscan/cli.hpp"
#include "steadyscan/explain.hpp"
#include "steadyscan/iron_model.hpp"
#include "steadyscan/model_parser.hpp"
#include "steadyscan/ode_sim.hpp"
#include "steadyscan/propagate.hpp"
#include "steadyscan/sampler.hpp"
#include "steadyscan/stl.hpp"
#include "stl_oracle.hpp"

using namespace steadyscan;
using namespace steadyscan::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int n, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = o.pass && s < limit_s;
  if (!ok) ++failures;
  std::printf("criterion %2d: %s  %s; %.2f s (limit %.0f s)\n", n, ok ? "PASS" : "FAIL", o.detail.c_str(), s, limit_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<Solution> iron_solutions(const Model& m, std::size_t n, std::uint64_t seed) {
  BoxUnion u;
  u.push_back(m.domain_box());
  return sample_steady_states(m, u, SamplerOptions{.seed = seed, .target = n}).solutions;
}

double ode_term_scale(const Model& m, std::size_t i, const std::vector<double>& y, const Assignment& a) {
  double scale = 0.0;
  for (const auto& t : additive_terms(m.odes[i])) {
    scale = std::max(scale, std::abs(evaluate<double>(t, [&](NodeKind k, int idx, const std::string&) {
                       return k == NodeKind::State ? y[static_cast<std::size_t>(idx)] : a.value(static_cast<std::size_t>(idx));
                     })));
  }
  return scale;
}

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "steadyscan");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out != nullptr) *out = o.str() + e.str();
  return code;
}

}  // namespace

int main() {
  // 1. every interval operation contains every pointwise result
  criterion(1, 10, [] {
    std::mt19937_64 rng(1);
    const IntervalOp ops[] = {IntervalOp::Add, IntervalOp::Sub, IntervalOp::Mul, IntervalOp::Div, IntervalOp::Pow,
                              IntervalOp::Neg, IntervalOp::Abs, IntervalOp::Min, IntervalOp::Max};
    long escaped = 0, points = 0;
    for (IntervalOp op : ops) {
      for (int trial = 0; trial < 1000; ++trial) {
        double a0 = uniform(rng, -10, 10), a1 = uniform(rng, -10, 10);
        double b0 = uniform(rng, -10, 10), b1 = uniform(rng, -10, 10);
        Interval a(std::min(a0, a1), std::max(a0, a1));
        Interval b(std::min(b0, b1), std::max(b0, b1));
        if (op == IntervalOp::Pow) {
          a = Interval(std::abs(a.lo()) * 0.3, std::abs(a.lo()) * 0.3 + a.width() * 0.3);
          b = Interval(b.lo() * 0.3, b.hi() * 0.3);
        }
        const Interval r = interval_apply(op, a, b);
        for (int k = 0; k < 100; ++k) {
          const double x = uniform(rng, a.lo(), a.hi());
          const double y = uniform(rng, b.lo(), b.hi());
          double v = 0.0;
          switch (op) {
            case IntervalOp::Add: v = x + y; break;
            case IntervalOp::Sub: v = x - y; break;
            case IntervalOp::Mul: v = x * y; break;
            case IntervalOp::Div: v = x / y; break;
            case IntervalOp::Pow: v = std::pow(x, y); break;
            case IntervalOp::Neg: v = -x; break;
            case IntervalOp::Abs: v = std::abs(x); break;
            case IntervalOp::Min: v = std::min(x, y); break;
            case IntervalOp::Max: v = std::max(x, y); break;
          }
          if (!std::isfinite(v)) continue;
          ++points;
          if (!r.contains(v)) ++escaped;
        }
      }
    }
    return Outcome{escaped == 0, fmt("9 ops x 1000 interval pairs, %ld points, %ld outside", points, escaped)};
  });

  // 2. no satisfying point is removed by contraction
  criterion(2, 30, [] {
    std::mt19937_64 rng(2);
    long satisfying = 0, escaped = 0;
    for (int sys = 0; sys < 20; ++sys) {
      const auto s = random_system(rng, 2 + sys % 5, 2 + sys % 4);
      const Box b = s.model.domain_box();
      const Box r = propagate_fixpoint(s.constraints, b);
      for (int k = 0; k < 1000; ++k) {
        const Assignment a = random_point(rng, b);
        if (!satisfies_all(s.constraints, a)) continue;
        ++satisfying;
        bool in = !r.is_empty();
        for (std::size_t d = 0; in && d < b.size(); ++d) in = r[d].contains(a.value(d));
        if (!in) ++escaped;
      }
    }
    return Outcome{escaped == 0, fmt("20 systems, %ld satisfying samples, %ld outside the contracted box", satisfying, escaped)};
  });

  // 3. a union of boxes shrinks the eps band where one box cannot
  criterion(3, 10, [] {
    const Model m = parse_model(
        "modelfile v1\nunknown x1 in [0, 1]\nunknown x2 in [0, 1]\nconstraint band: abs(x1 - x2) < 0.01\n");
    const double single = propagate_fixpoint(m.constraints, m.domain_box()).volume();
    const BoxUnion u = pave(m.constraints, m.domain_box(), 0.005);
    const double paved = u.volume();
    return Outcome{paved <= 0.1 && single == 1.0,
                   fmt("single-box area %.4f, paving area %.4f over %zu boxes", single, paved, u.size())};
  });

  // 4. minimum conflict sets equal the exhaustive subset oracle
  criterion(4, 60, [] {
    std::mt19937_64 rng(4);
    int agree = 0;
    for (int inst = 0; inst < 50; ++inst) {
      const auto s = random_conflicting_system(rng, 10);
      const Box b = s.model.domain_box();
      const ConflictReport r = min_conflict_sets(s.constraints, b, 1000);
      if (r.minimal_sets == exhaustive_min_sets(s.constraints, b)) ++agree;
    }
    return Outcome{agree == 50, fmt("%d of 50 instances match", agree)};
  });

  // 5. the receptor rule yields the two per-term bounds
  criterion(5, 10, [] {
    const Model m = builtin_iron_model();
    std::vector<Constraint> eq12 = {*m.find_constraint("eq12")};
    const auto red = add_redundant(eq12, m.redundancy_rules, m.domain_box());
    std::string got;
    bool ok = red.size() == 2;
    const char* want[] = {"t_TfR1*TfR1_f_eq", "t_TfR1*TfR1_b_eq"};
    for (std::size_t i = 0; i < red.size(); ++i) {
      got += (i ? "; " : "") + to_string(red[i].lhs) + " " + to_string(red[i].relation) + " " + to_string(red[i].rhs);
      ok = ok && i < 2 && to_string(red[i].lhs) == want[i] && red[i].relation == Relation::Lt && red[i].rhs.value() == 5.5e-13;
    }
    return Outcome{ok, got};
  });

  const Model iron = builtin_iron_model();

  // 6. sampled steady states are steady and satisfy the data constraints
  criterion(6, 120, [&] {
    const auto sols = iron_solutions(iron, 100, 6);
    double worst_ode = 0.0, worst_total = 0.0;
    int data_fail = 0;
    for (const auto& s : sols) {
      const auto y = steady_state_vector(iron, s.assignment);
      const auto d = rhs(iron, y, s.assignment);
      for (std::size_t i = 0; i < d.size(); ++i) {
        const double scale = ode_term_scale(iron, i, y, s.assignment);
        worst_ode = std::max(worst_ode, std::abs(d[i]) / scale);
      }
      for (const char* id : {"eq9", "eq10", "eq11", "eq12"}) data_fail += holds(*iron.find_constraint(id), s.assignment) ? 0 : 1;
      const double total = s.assignment.at("p_Ft") / s.assignment.at("dr_Ft");
      worst_total = std::max(worst_total,
                             std::abs(s.assignment.at("Ft_f_eq") + s.assignment.at("Ft_b_eq") - total) / total);
    }
    return Outcome{sols.size() == 100 && worst_ode <= 1e-9 && data_fail == 0 && worst_total <= 1e-9,
                   fmt("%zu solutions, max |dx/dt|/term-scale %.2e, eq9-12 failures %d, max Ft total error %.2e",
                       sols.size(), worst_ode, data_fail, worst_total)};
  });

  // 7. throughput through the command line, as a user would run it
  criterion(7, 600, [&] {
    const fs::path dir = fs::temp_directory_path() / "steadyscan_acceptance";
    fs::remove_all(dir);
    std::string out;
    const int code = cli({"pipeline", "models/iron_v2.model", "--seed", "7", "--target", "1000", "--jobs", "4",
                          "--out-dir", dir.string()},
                         &out);
    std::ifstream is(dir / "solutions.jsonl");
    const auto sols = code == kExitOk ? read_solutions(is, iron) : std::vector<Solution>{};
    std::size_t valid = 0;
    for (const auto& s : sols) valid += verify(iron, s.assignment).empty() ? 1 : 0;
    return Outcome{code == kExitOk && valid >= 1000,
                   fmt("pipeline exit %d, %zu solutions, %zu re-verified", code, sols.size(), valid)};
  });

  // 8. stable steady states respond to the cut-off as specified
  criterion(8, 300, [&] {
    const auto sols = iron_solutions(iron, 100, 8);
    int stable = 0, ok = 0;
    std::string failed;
    for (const auto& s : sols) {
      const auto y0 = steady_state_vector(iron, s.assignment);
      if (stability_check(iron, s.assignment, y0).kind != StabilityKind::Stable) continue;
      ++stable;
      const Trace t = simulate(iron, s.assignment, y0, simulation_horizon(iron));
      const StlVerdict v = satisfies(model_stl(iron, s.assignment), t);
      if (v.satisfied) {
        ++ok;
      } else {
        failed += fmt(" %llu(rho=%.2e)", static_cast<unsigned long long>(s.attempt), v.robustness);
      }
    }
    const double rate = stable > 0 ? static_cast<double>(ok) / stable : 0.0;
    return Outcome{stable > 0 && rate >= 0.9,
                   fmt("%d of 100 stable, %d of those satisfy (%.0f%%)", stable, ok, 100 * rate) +
                       (failed.empty() ? "" : "; violating attempts:" + failed)};
  });

  // 9. monitor sign against the dense-grid boolean oracle
  criterion(9, 60, [] {
    std::mt19937_64 rng(9);
    int agree = 0, marginal = 0, unresolved = 0, mismatch = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto c = random_stl_case(rng);
      switch (compare_with_oracle(c.formula, c.trace).verdict) {
        case OracleVerdict::Agree: ++agree; break;
        case OracleVerdict::Marginal: ++marginal; break;
        case OracleVerdict::Unresolved: ++unresolved; break;
        case OracleVerdict::Mismatch: ++mismatch; break;
      }
    }
    return Outcome{mismatch == 0 && unresolved == 0,
                   fmt("1000 pairs: %d agree, %d marginal, %d within grid resolution, %d mismatches", agree, marginal,
                       unresolved, mismatch)};
  });

  // 10. the pre-revision fixture is proven inconsistent and explained
  criterion(10, 60, [] {
    const fs::path dir = fs::temp_directory_path() / "steadyscan_acceptance_fixture";
    fs::remove_all(dir);
    const int code = cli({"pipeline", "fixtures/pre_revision.model", "--seed", "7", "--out-dir", dir.string()});
    std::ifstream is(dir / "conflicts.json");
    const auto j = nlohmann::json::parse(is);
    std::string low;
    for (const auto& set : j["minimal_sets"]) {
      for (const auto& id : set) {
        if (j["reliability"].value(id.get<std::string>(), "") == "low") low = id.get<std::string>();
      }
    }
    return Outcome{code == kExitInconsistent && !low.empty(),
                   fmt("exit %d, %zu conflict sets, low-reliability member: %s", code, j["minimal_sets"].size(),
                       low.empty() ? "none" : low.c_str())};
  });

  std::printf("%d criteria failed\n", failures);
  return failures;
}
