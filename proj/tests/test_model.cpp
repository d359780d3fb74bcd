#include <random>

#include "doctest.h"
#include "steadyscan/assignment.hpp"
#include "steadyscan/model_parser.hpp"

using namespace steadyscan;

namespace {

const char* kDecay = R"(modelfile v1
# one species with constant production
name decay
unknown k in [0.1, 10] scale log
unknown p in [1, 2]
unknown x_eq in [0, 100]
state x
ode x = p - k*x
derive-steady-state
)";

const char* kRich = R"(modelfile v1
name rich
option hill_exponent 3
unknown a in [1e-6, 1e-3]
unknown b in [-2, 2] scale linear reconstructed
unknown th in [0.5, 2]
unknown y_eq in [0, 10]
unknown z_eq in [0, 10]
state y, z
ode y [reconstructed] = a - b*y^2 + sigp(z, th)
ode z = -(a - z)/(b + 3) + abs(min(y, z)) - max(a, -2.5)
derive-steady-state
constraint c1 [data, reliability=low]: a/b > 1e-4
constraint c2 [steady-state, data]: (y_eq + z_eq)/2 in [0.1, 7]
constraint c3: a*(-1) <= 2^-b^2
derive c2: y_eq + z_eq < 14
event cut at 10*a: a = 0, b = -1
stl: eventually[0, 5] (y > 0.5 * y_eq)
)";

}  // namespace

TEST_CASE("minimal one-state model") {
  const Model m = parse_model(kDecay);
  CHECK(m.name == "decay");
  REQUIRE(m.states.size() == 1);
  REQUIRE(m.odes.size() == 1);
  REQUIRE(m.constraints.size() == 1);
  const Constraint& ss = m.constraints[0];
  CHECK(ss.id == "ss_x");
  CHECK(ss.generated);
  CHECK(ss.has_tag("steady-state"));
  CHECK(to_string(ss.lhs) == "p - k*x_eq");
  CHECK(m.unknowns[0].scale == Scale::Log);
  CHECK(m.unknowns[1].scale == Scale::Linear);
  CHECK(m.parameters().size() == 2);
  CHECK(m.is_steady_unknown(2));
}

TEST_CASE("parse errors carry positions") {
  SUBCASE("undeclared name") {
    std::string text = std::string(kDecay) + "constraint bad: dr_Foo > 1\n";
    try {
      parse_model(text);
      FAIL("expected an error");
    } catch (const UndeclaredNameError& e) {
      CHECK(e.name() == "dr_Foo");
      CHECK(e.line() == 10);
      CHECK(e.column() == 17);
    }
  }
  SUBCASE("duplicate constraint id") {
    std::string text = std::string(kDecay) + "constraint a1: k > 1\nconstraint a1: k < 5\n";
    CHECK_THROWS_AS(parse_model(text), DuplicateIdError);
  }
  SUBCASE("duplicate unknown") {
    CHECK_THROWS_AS(parse_model("modelfile v1\nunknown a in [0,1]\nunknown a in [0,2]\n"), DuplicateIdError);
  }
  SUBCASE("syntax") {
    try {
      parse_model("modelfile v1\nunknown a in [0,1]\nconstraint c: a + * 2 > 0\n");
      FAIL("expected an error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(e.column() == 19);
    }
  }
  SUBCASE("missing header") { CHECK_THROWS_AS(parse_model("unknown a in [0,1]\n"), ParseError); }
  SUBCASE("missing steady-state unknown") {
    CHECK_THROWS_AS(parse_model("modelfile v1\nstate x\nunknown k in [1,2]\node x = -k*x\nderive-steady-state\n"),
                    UndeclaredNameError);
  }
  SUBCASE("state without ode") {
    CHECK_THROWS_AS(parse_model("modelfile v1\nstate x, y\nunknown k in [1,2]\node x = -k*x\n"), ParseError);
  }
}

TEST_CASE("rich grammar and print round trip") {
  const Model m = parse_model(kRich);
  CHECK(m.option("hill_exponent", 0) == 3.0);
  CHECK(m.ode_reconstructed[0]);
  CHECK(m.unknowns[1].reconstructed);
  // default sigmoid exponent comes from the option
  const Expr& y_rhs = m.odes[0];
  const Expr sig = y_rhs.arg(1);
  REQUIRE(sig.kind() == NodeKind::SigmoidPlus);
  CHECK(sig.arg(2).is_constant(3.0));
  const Constraint* c1 = m.find_constraint("c1");
  REQUIRE(c1);
  CHECK(c1->reliability == "low");
  CHECK(c1->has_tag("data"));
  const Constraint* c2 = m.find_constraint("c2");
  REQUIRE(c2);
  CHECK(c2->relation == Relation::In);
  CHECK(c2->has_tag("steady-state"));
  CHECK(m.redundancy_rules.size() == 1);
  CHECK(m.events.size() == 1);
  CHECK(m.events[0].assignments.size() == 2);
  CHECK(m.stl_spec == "eventually[0, 5] (y > 0.5 * y_eq)");

  const std::string printed = print_model(m);
  const Model again = parse_model(printed);
  CHECK(structurally_equal(m, again));
  CHECK(print_model(again) == printed);
}

TEST_CASE("point evaluation") {
  const Model m = parse_model(R"(modelfile v1
unknown p_Ft in [1e-12, 1e-9]
unknown dr_Ft in [1e-6, 1e-4]
unknown ka in [1e5, 1e7]
constraint total: p_Ft / dr_Ft > 0
constraint needs_ka: ka * p_Ft > 0
)");
  Assignment a(m.space());
  a.set("p_Ft", 2e-10);
  a.set("dr_Ft", 1e-5);
  CHECK(eval_point(m.constraints[0].lhs, a) == doctest::Approx(2e-5));
  try {
    eval_point(m.constraints[1].lhs, a);
    FAIL("expected missing value");
  } catch (const MissingValueError& e) {
    CHECK(e.name() == "ka");
  }
}

TEST_CASE("ferritin protein balance vanishes at its closed-form steady state") {
  const Model m = parse_model(R"(modelfile v1
unknown t_Ft in [1e-3, 10]
unknown dp_Ft in [3.8e-6, 3.8e-5]
unknown Ft_f_eq in [1e-12, 1e-9]
unknown Ft_p_eq in [1e-10, 1e-7]
constraint protein: (t_Ft/24)*Ft_f_eq - dp_Ft*Ft_p_eq = 0
)");
  Assignment a(m.space());
  const double dp = 1.2e-5;
  const double ftp = 3e-9;
  const double ftf = 4e-11;
  a.set("dp_Ft", dp);
  a.set("Ft_p_eq", ftp);
  a.set("Ft_f_eq", ftf);
  a.set("t_Ft", 24.0 * dp * ftp / ftf);
  const double terms = dp * ftp;
  CHECK(std::abs(eval_point(m.constraints[0].lhs, a)) <= 1e-14 * terms);
}

TEST_CASE("interval evaluation") {
  const Model m = parse_model(R"(modelfile v1
unknown x in [0, 1]
unknown y in [0, 1]
unknown ka in [1e5, 1e7]
unknown Ft_f in [1e-12, 1e-9]
unknown IRP in [1e-10, 1e-8]
constraint d: x - y > 0
constraint prod: ka*Ft_f*IRP > 0
constraint mix: sigp(x, 0.5 + y) * x^3 - abs(x - 2*y) / (1 + y^2) + min(x, y) * max(x, -y) = 0
)");
  const Box b = m.domain_box();
  const Interval d = eval_interval(m.constraints[0].lhs, b);
  CHECK(d.lo() == doctest::Approx(-1.0));
  CHECK(d.hi() == doctest::Approx(1.0));
  const Interval p = eval_interval(m.constraints[1].lhs, b);
  CHECK(p.lo() > 0.0);

  // Monte-Carlo containment on random sub-boxes
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const Expr& e = m.constraints[2].lhs;
  for (int t = 0; t < 50; ++t) {
    Box sub = b;
    for (std::size_t i = 0; i < 2; ++i) {
      double a0 = u01(rng);
      double a1 = u01(rng);
      sub[i] = Interval(std::min(a0, a1), std::max(a0, a1));
    }
    const Interval r = eval_interval(e, sub);
    Assignment a(m.space());
    for (int k = 0; k < 1000; ++k) {
      for (std::size_t i = 0; i < sub.size(); ++i) {
        a.set(i, sub[i].lo() + u01(rng) * sub[i].width());
      }
      CHECK(r.contains(eval_point(e, a)));
    }
  }
}

TEST_CASE("degenerate box evaluation matches point evaluation") {
  const Model m = parse_model(kRich);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    Assignment a(m.space());
    std::vector<Interval> dims;
    for (std::size_t i = 0; i < m.unknowns.size(); ++i) {
      const Interval& d = m.unknowns[i].domain;
      double v = std::uniform_real_distribution<double>(d.lo(), d.hi())(rng);
      if (m.unknowns[i].name == "b") v = 0.5 + std::abs(v);
      a.set(i, v);
      dims.emplace_back(v);
    }
    const Box pt(m.space(), dims);
    for (const auto& c : m.constraints) {
      const double v = eval_point(c.lhs, a);
      const Interval r = eval_interval(c.lhs, pt);
      CHECK(r.contains(v));
      CHECK(r.width() <= 1e-10 * std::max(1.0, std::abs(v)) + 1e-300);
    }
  }
}

TEST_CASE("linear and power splitting") {
  const Model m = parse_model(R"(modelfile v1
unknown a in [1, 2]
unknown u in [1, 2]
unknown c in [1, 2]
constraint lin: a*u + c - 3*(u - a)/c = 0
constraint sq: a*u^2 - c = 0
constraint nl: u*u - c = 0
)");
  const int u = *m.unknown_index("u");
  auto lf = linear_split(m.constraints[0].lhs, u);
  REQUIRE(lf);
  Assignment a(m.space());
  a.set("a", 1.5);
  a.set("c", 1.25);
  const double solved = -eval_point(lf->rest, a) / eval_point(lf->coefficient, a);
  a.set("u", solved);
  CHECK(std::abs(eval_point(m.constraints[0].lhs, a)) < 1e-12);

  CHECK_FALSE(linear_split(m.constraints[1].lhs, u));
  auto pf = isolated_power(m.constraints[1].lhs, u);
  REQUIRE(pf);
  CHECK(pf->exponent == 2);
  CHECK_FALSE(isolated_power(m.constraints[2].lhs, u));
}
