#include <random>

#include "doctest.h"
#include "steadyscan/box.hpp"
#include "steadyscan/errors.hpp"
#include "steadyscan/interval.hpp"

using namespace steadyscan;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool approx_interval(const Interval& x, double lo, double hi, double rel = 1e-10) {
  auto close = [rel](double a, double b) {
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::abs(a - b) <= rel * std::max(1.0, std::abs(b));
  };
  return close(x.lo(), lo) && close(x.hi(), hi);
}

Interval random_interval(std::mt19937_64& rng, double span = 10.0) {
  std::uniform_real_distribution<double> u(-span, span);
  double a = u(rng);
  double b = u(rng);
  if (a > b) std::swap(a, b);
  return {a, b};
}

double point_in(std::mt19937_64& rng, const Interval& x) {
  std::uniform_real_distribution<double> u(x.lo(), x.hi());
  return u(rng);
}

}  // namespace

TEST_CASE("endpoint arithmetic") {
  CHECK(approx_interval(Interval(1, 2) + Interval(3, 4), 4, 6));
  CHECK(approx_interval(Interval(-1, 2) * Interval(3, 4), -4, 8));
  CHECK(approx_interval(Interval(1, 2) - Interval(3, 4), -3, -1));
  CHECK(approx_interval(-Interval(1, 2), -2, -1));
  CHECK(approx_interval(abs(Interval(-3, 2)), 0, 3));
  CHECK(approx_interval(min(Interval(0, 5), Interval(1, 2)), 0, 2));
  CHECK(approx_interval(max(Interval(0, 5), Interval(1, 2)), 1, 5));
  CHECK(approx_interval(pow(Interval(-2, 3), 2), 0, 9));
  CHECK(approx_interval(pow(Interval(-2, 3), 3), -8, 27));
}

TEST_CASE("results are widened outward") {
  const Interval s = Interval(1, 2) + Interval(3, 4);
  CHECK(s.lo() < 4.0);
  CHECK(s.hi() > 6.0);
  CHECK(s.lo() > 4.0 - 1e-10);
}

TEST_CASE("division by an interval containing zero") {
  const Interval q = Interval(1, 1) / Interval(-1, 1);
  CHECK(q.lo() == -kInf);
  CHECK(q.hi() == kInf);
  // one-sided zero keeps the sign information
  const Interval r = Interval(1, 2) / Interval(0, 4);
  CHECK(r.lo() == doctest::Approx(0.25));
  CHECK(r.hi() == kInf);

  // brute force over a 10^4-point grid: every defined quotient is contained
  for (const auto& [a, b] : {std::pair{Interval(1, 1), Interval(-1, 1)}, std::pair{Interval(-2, 3), Interval(-1, 0)},
                             std::pair{Interval(1, 2), Interval(0, 4)}}) {
    const Interval res = a / b;
    for (int i = 0; i < 100; ++i) {
      for (int j = 0; j < 100; ++j) {
        const double x = a.lo() + (a.hi() - a.lo()) * i / 99.0;
        const double y = b.lo() + (b.hi() - b.lo()) * j / 99.0;
        if (y == 0.0) continue;
        CHECK(res.contains(x / y));
      }
    }
  }
}

TEST_CASE("empty operands and domain errors") {
  CHECK((Interval::empty() + Interval(1, 2)).is_empty());
  CHECK((Interval(1, 2) * Interval::empty()).is_empty());
  CHECK(intersect(Interval(0, 1), Interval(2, 3)).is_empty());
  CHECK_THROWS_AS(pow(Interval(-1, 2), Interval(0.5)), DomainError);
  CHECK_NOTHROW(pow(Interval(-1, 2), Interval(2.0)));
  CHECK(interval_apply(IntervalOp::Add, Interval::empty(), Interval(1, 2)).is_empty());
}

TEST_CASE("containment property for every operation") {
  std::mt19937_64 rng(42);
  const IntervalOp ops[] = {IntervalOp::Add, IntervalOp::Sub, IntervalOp::Mul, IntervalOp::Div, IntervalOp::Pow,
                            IntervalOp::Neg, IntervalOp::Abs, IntervalOp::Min, IntervalOp::Max};
  for (IntervalOp op : ops) {
    int failures = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      Interval a = random_interval(rng);
      Interval b = random_interval(rng);
      if (op == IntervalOp::Pow) {
        a = Interval(std::abs(a.lo()) * 0.3, std::abs(a.lo()) * 0.3 + a.width() * 0.3);
        b = Interval(b.lo() * 0.3, b.hi() * 0.3);
      }
      const Interval r = interval_apply(op, a, b);
      for (int k = 0; k < 1000; ++k) {
        const double x = point_in(rng, a);
        const double y = point_in(rng, b);
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
        if (!r.contains(v)) ++failures;
      }
    }
    CHECK(failures == 0);
  }
}

TEST_CASE("sigmoid-plus saturates and is contained") {
  CHECK(sigmoid_plus(1.0, 1.0, 4.0) == doctest::Approx(0.5));
  CHECK(sigmoid_plus(0.0, 1.0, 4.0) == 0.0);
  CHECK(sigmoid_plus(-1.0, 1.0, 4.0) == 0.0);
  CHECK(sigmoid_plus(100.0, 1.0, 4.0) > 0.9999);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    Interval x = random_interval(rng, 3.0);
    Interval th(0.1 + std::abs(point_in(rng, Interval(0, 2))), 2.5);
    Interval n(1.0, 1.0 + std::abs(point_in(rng, Interval(0, 4))));
    Interval r = sigmoid_plus(x, th, n);
    for (int k = 0; k < 200; ++k) {
      CHECK(r.contains(sigmoid_plus(point_in(rng, x), point_in(rng, th), point_in(rng, n))));
    }
  }
}

TEST_CASE("box operations") {
  const Box a{{"x", Interval(0, 2)}};
  const Box b(a.space(), {Interval(1, 3)});
  const Box i = intersect(a, b);
  CHECK(i[0] == Interval(1, 2));

  const Box c(a.space(), {Interval(2, 3)});
  const Box d(a.space(), {Interval(0, 1)});
  CHECK(intersect(c, d).is_empty());

  const Box e{{"x", Interval(0, 4)}, {"y", Interval(0, 1)}};
  auto [l, r] = split(e);
  CHECK(l.at("x") == Interval(0, 2));
  CHECK(r.at("x") == Interval(2, 4));
  CHECK(l.at("y") == Interval(0, 1));
  CHECK(hull(l, r) == e);

  const Box other{{"z", Interval(0, 1)}};
  CHECK_THROWS_AS(intersect(a, other), StructuralError);
}

TEST_CASE("relative width picks the split dimension") {
  // x spans a decade at a large magnitude, y a narrow band around 1
  const Box b{{"x", Interval(100, 1000)}, {"y", Interval(0.9, 1.1)}, {"z", Interval(100, 1000)}};
  CHECK(widest_relative_dimension(b) == 0);  // tie with z goes to declaration order
  CHECK(relative_width(Interval(3, 3)) == 0.0);
}

TEST_CASE("intersection is idempotent, commutative and associative") {
  std::mt19937_64 rng(9);
  auto space = make_space({"a", "b", "c"});
  auto rbox = [&] {
    return Box(space, {random_interval(rng), random_interval(rng), random_interval(rng)});
  };
  for (int t = 0; t < 300; ++t) {
    const Box x = rbox();
    const Box y = rbox();
    const Box z = rbox();
    CHECK(intersect(x, x) == x);
    CHECK(intersect(x, y) == intersect(y, x));
    CHECK(intersect(intersect(x, y), z) == intersect(x, intersect(y, z)));
    auto [l, r] = split(x);
    CHECK(hull(l, r) == x);
  }
}
