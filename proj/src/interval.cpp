#include "steadyscan/interval.hpp"

#include <algorithm>
#include <array>
#include <ostream>

#include "steadyscan/errors.hpp"

namespace steadyscan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double widen_down(double x) {
  if (!std::isfinite(x)) return x;
  return x - std::abs(x) * Interval::kInflation;
}

double widen_up(double x) {
  if (!std::isfinite(x)) return x;
  return x + std::abs(x) * Interval::kInflation;
}

// 0 * inf = 0 for endpoint products.
double mul_endpoint(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}

Interval reciprocal(const Interval& b) {
  // caller guarantees 0 is not in b
  return inflate(1.0 / b.hi(), 1.0 / b.lo());
}

double ipow(double x, int n) {
  return std::pow(x, n);
}

}  // namespace

double Interval::mid() const {
  if (is_empty()) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(lo_) && std::isinf(hi_)) return 0.0;
  if (std::isinf(lo_)) return -std::numeric_limits<double>::max();
  if (std::isinf(hi_)) return std::numeric_limits<double>::max();
  return lo_ + 0.5 * (hi_ - lo_);
}

std::ostream& operator<<(std::ostream& os, const Interval& x) {
  if (x.is_empty()) return os << "[empty]";
  return os << '[' << x.lo() << ", " << x.hi() << ']';
}

Interval inflate(double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi)) return Interval::entire();
  return {widen_down(lo), widen_up(hi)};
}

Interval intersect(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  return {std::max(a.lo(), b.lo()), std::min(a.hi(), b.hi())};
}

Interval hull(const Interval& a, const Interval& b) {
  if (a.is_empty()) return b;
  if (b.is_empty()) return a;
  return {std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

double relative_width(const Interval& x) {
  if (x.is_empty()) return 0.0;
  const double w = x.width();
  if (w == 0.0) return 0.0;
  const double m = std::abs(x.mid());
  if (m == 0.0 || std::isinf(w)) return kInf;
  return w / m;
}

Interval operator-(const Interval& a) {
  if (a.is_empty()) return a;
  return {-a.hi(), -a.lo()};
}

Interval operator+(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  return inflate(a.lo() + b.lo(), a.hi() + b.hi());
}

Interval operator-(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  return inflate(a.lo() - b.hi(), a.hi() - b.lo());
}

Interval operator*(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  const std::array<double, 4> p = {mul_endpoint(a.lo(), b.lo()), mul_endpoint(a.lo(), b.hi()),
                                   mul_endpoint(a.hi(), b.lo()), mul_endpoint(a.hi(), b.hi())};
  return inflate(*std::min_element(p.begin(), p.end()), *std::max_element(p.begin(), p.end()));
}

Interval operator/(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  if (!b.contains(0.0)) return a * reciprocal(b);
  if (b.lo() == 0.0 && b.hi() > 0.0) {
    if (a.lo() > 0.0) return inflate(a.lo() / b.hi(), kInf);
    if (a.hi() < 0.0) return inflate(-kInf, a.hi() / b.hi());
  } else if (b.hi() == 0.0 && b.lo() < 0.0) {
    if (a.lo() > 0.0) return inflate(-kInf, a.lo() / b.lo());
    if (a.hi() < 0.0) return inflate(a.hi() / b.lo(), kInf);
  }
  return Interval::entire();
}

Interval abs(const Interval& a) {
  if (a.is_empty()) return a;
  if (a.lo() >= 0.0) return a;
  if (a.hi() <= 0.0) return -a;
  return {0.0, std::max(-a.lo(), a.hi())};
}

Interval min(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  return {std::min(a.lo(), b.lo()), std::min(a.hi(), b.hi())};
}

Interval max(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  return {std::max(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

Interval pow(const Interval& base, int n) {
  if (base.is_empty()) return base;
  if (n == 0) return Interval(1.0);
  if (n < 0) return Interval(1.0) / pow(base, -n);
  const double lo = ipow(base.lo(), n);
  const double hi = ipow(base.hi(), n);
  if (n % 2 == 1 || base.lo() >= 0.0) return inflate(std::min(lo, hi), std::max(lo, hi));
  if (base.hi() <= 0.0) return inflate(hi, lo);
  return inflate(0.0, std::max(lo, hi));
}

std::optional<int> as_small_integer(double x) {
  if (!std::isfinite(x) || std::abs(x) > 1 << 20 || std::floor(x) != x) return std::nullopt;
  return static_cast<int>(x);
}

double real_pow(double base, double exponent) {
  if (as_small_integer(exponent)) return std::pow(base, exponent);
  if (base < 0.0) throw DomainError("non-integer exponent on negative base");
  return std::pow(base, exponent);
}

Interval pow(const Interval& base, const Interval& exponent) {
  if (base.is_empty() || exponent.is_empty()) return Interval::empty();
  if (exponent.is_degenerate()) {
    if (auto n = as_small_integer(exponent.lo())) return pow(base, *n);
  }
  if (base.lo() < 0.0) throw DomainError("non-integer exponent on negative base");
  // x^y is monotone in each argument separately on x >= 0, so the corners bound it.
  const std::array<double, 4> c = {std::pow(base.lo(), exponent.lo()), std::pow(base.lo(), exponent.hi()),
                                   std::pow(base.hi(), exponent.lo()), std::pow(base.hi(), exponent.hi())};
  double lo = kInf;
  double hi = -kInf;
  for (double v : c) {
    if (std::isnan(v)) return Interval::nonnegative();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return inflate(lo, hi);
}

double sigmoid_plus(double x, double theta, double n) {
  if (x <= 0.0) return 0.0;
  if (theta < 0.0) throw DomainError("sigmoid threshold must be nonnegative");
  const double r = std::pow(theta / x, n);
  return 1.0 / (1.0 + r);
}

Interval sigmoid_plus(const Interval& x, const Interval& theta, const Interval& n) {
  if (x.is_empty() || theta.is_empty() || n.is_empty()) return Interval::empty();
  if (theta.lo() < 0.0) throw DomainError("sigmoid threshold must be nonnegative");
  if (x.hi() <= 0.0) return Interval(0.0);
  const Interval xs{std::max(x.lo(), 0.0), x.hi()};
  // Monotone in each argument separately.
  double lo = kInf;
  double hi = -kInf;
  for (double xv : {xs.lo(), xs.hi()}) {
    for (double tv : {theta.lo(), theta.hi()}) {
      for (double nv : {n.lo(), n.hi()}) {
        double v = sigmoid_plus(xv, tv, nv);
        if (std::isnan(v)) return Interval(0.0, 1.0);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  return intersect(inflate(lo, hi), Interval(0.0, 1.0));
}

Interval interval_apply(IntervalOp op, const Interval& a, const std::optional<Interval>& b) {
  auto rhs = [&]() -> const Interval& {
    if (!b) throw StructuralError("binary interval operation needs two operands");
    return *b;
  };
  switch (op) {
    case IntervalOp::Add: return a + rhs();
    case IntervalOp::Sub: return a - rhs();
    case IntervalOp::Mul: return a * rhs();
    case IntervalOp::Div: return a / rhs();
    case IntervalOp::Pow: return pow(a, rhs());
    case IntervalOp::Neg: return -a;
    case IntervalOp::Abs: return abs(a);
    case IntervalOp::Min: return min(a, rhs());
    case IntervalOp::Max: return max(a, rhs());
  }
  return Interval::entire();
}

}  // namespace steadyscan
