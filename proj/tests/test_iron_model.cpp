#include <algorithm>
#include <filesystem>

#include "doctest.h"
#include "steadyscan/explain.hpp"
#include "steadyscan/iron_model.hpp"
#include "steadyscan/ode_sim.hpp"
#include "steadyscan/propagate.hpp"
#include "steadyscan/sampler.hpp"

using namespace steadyscan;

namespace {

std::vector<double> zero_state(const Model& m) { return std::vector<double>(m.states.size(), 0.0); }

Assignment some_parameters(const Model& m) {
  // geometric midpoints are enough for structural checks
  Assignment a(m.space());
  for (int i : m.parameters()) {
    const Interval d = m.unknowns[i].domain;
    a.set(static_cast<std::size_t>(i), std::sqrt(d.lo() * d.hi()));
  }
  return a;
}

}  // namespace

TEST_CASE("structure of the shipped model") {
  const Model m = builtin_iron_model();
  CHECK(m.name == "iron_v2");
  CHECK(m.states.size() == 15);
  CHECK(m.odes.size() == 15);
  CHECK(m.parameters().size() == 28);
  CHECK(m.derive_steady_state);
  for (std::size_t s = 0; s < m.states.size(); ++s) CHECK(m.steady_unknown(static_cast<int>(s)).has_value());
  for (const char* id : {"eq9", "eq10", "eq11", "eq12"}) {
    CAPTURE(id);
    const Constraint* c = m.find_constraint(id);
    REQUIRE(c != nullptr);
    CHECK(c->has_tag("data"));
  }
  CHECK(m.find_constraint("eq12")->relation == Relation::In);
  CHECK(m.find_constraint("eq12")->range == Interval(7.0e-6, 7.0e-5));
  const Interval dp = m.unknowns[*m.unknown_index("dp_Ft")].domain;
  CHECK(dp == Interval(3.8e-6, 3.8e-5));
  CHECK(m.unknowns[*m.unknown_index("dp_TfR1")].domain == Interval(5.5e-6, 5.5e-5));
  CHECK(m.unknowns[*m.unknown_index("TfR1_p_eq")].domain.hi() == 5e-9);
  REQUIRE(m.redundancy_rules.size() == 1);
  CHECK(m.redundancy_rules[0].source_id == "eq12");
  CHECK(m.redundancy_rules[0].bound == 5.5e-13);
  REQUIRE(m.events.size() == 1);
  CHECK(simulation_horizon(m) == 4e5);
  // one steady-state equation per state
  std::size_t generated = 0;
  for (const auto& c : m.constraints) generated += c.generated ? 1 : 0;
  CHECK(generated == 15);
}

TEST_CASE("translation factors for multimeric proteins") {
  const Model m = builtin_iron_model();
  const Assignment a = some_parameters(m);
  auto y = zero_state(m);
  y[*m.state_index("Ft_f")] = 1e-10;
  y[*m.state_index("TfR1_f")] = 2e-10;
  y[*m.state_index("TfR1_b")] = 3e-10;
  y[*m.state_index("FPN1a_f")] = 4e-10;
  const auto d = rhs(m, y, a);
  CHECK(d[*m.state_index("Ft_p")] == doctest::Approx(a.at("t_Ft") / 24 * 1e-10).epsilon(1e-14));
  CHECK(d[*m.state_index("TfR1_p")] == doctest::Approx(a.at("t_TfR1") / 2 * 5e-10).epsilon(1e-14));
  CHECK(d[*m.state_index("FPN1a_p")] == doctest::Approx(a.at("t_FPN1a") * 4e-10).epsilon(1e-14));
}

TEST_CASE("iron inactivates IRP through the sigmoid") {
  const Model m = builtin_iron_model();
  const Assignment a = some_parameters(m);
  const std::size_t fe = *m.state_index("Fe");
  const std::size_t irp = *m.state_index("IRP");
  auto loss = [&](double iron) {
    auto y = zero_state(m);
    y[irp] = 1e-9;
    y[fe] = iron;
    return a.at("p_IRP") - rhs(m, y, a)[irp];
  };
  const double theta = a.at("theta_Fe_IRP");
  const double basal = a.at("dp_IRP") * 1e-9;
  CHECK(loss(0.0) == doctest::Approx(basal).epsilon(1e-12));
  CHECK(loss(theta) == doctest::Approx(basal + 0.5 * a.at("k_Fe_IRP") * 1e-9).epsilon(1e-12));
  CHECK(loss(100 * theta) > loss(theta));
}

TEST_CASE("revision fixture") {
  const RevisionFixture fx = revision_fixture();
  SUBCASE("before the revision the constraints contradict each other") {
    const Model& m = fx.pre_revision;
    const Constraint* c = m.find_constraint("ire5_transcription");
    REQUIRE(c != nullptr);
    CHECK(c->reliability == "low");
    CHECK(propagate_fixpoint(m.constraints, m.domain_box()).is_empty());
    const ConflictReport r = min_conflict_sets(m.constraints, m.domain_box());
    CHECK_FALSE(r.consistent);
    REQUIRE_FALSE(r.minimal_sets.empty());
    bool mentioned = false;
    for (const auto& s : r.minimal_sets) mentioned |= std::find(s.begin(), s.end(), "ire5_transcription") != s.end();
    CHECK(mentioned);
  }
  SUBCASE("after the revision steady states exist") {
    const Model& m = fx.post_revision;
    CHECK_FALSE(propagate_fixpoint(m.constraints, m.domain_box()).is_empty());
    BoxUnion u;
    u.push_back(m.domain_box(), false);
    const SampleResult r = sample_steady_states(m, u, SamplerOptions{.seed = 3, .target = 10});
    CHECK(r.solutions.size() == 10);
    for (const auto& s : r.solutions) CHECK(verify(m, s.assignment).empty());
  }
}

TEST_CASE("loading models") {
  CHECK(structurally_equal(load_model("iron"), builtin_iron_model()));
  CHECK(structurally_equal(load_model("iron_v2"), builtin_iron_model()));
  CHECK(structurally_equal(load_model("pre_revision"), revision_fixture().pre_revision));
  // the shipped file on disk matches the compiled-in copy
  REQUIRE(std::filesystem::exists("models/iron_v2.model"));
  CHECK(structurally_equal(load_model("models/iron_v2.model"), builtin_iron_model()));
  CHECK(structurally_equal(load_model("fixtures/pre_revision.model"), revision_fixture().pre_revision));
  const auto names = builtin_model_names();
  CHECK(std::find(names.begin(), names.end(), "iron") != names.end());
  CHECK_THROWS_AS(load_model("no_such_model"), Error);
}
