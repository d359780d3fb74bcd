#pragma once

#include <cmath>
#include <iosfwd>
#include <limits>
#include <optional>

namespace steadyscan {

/// Closed real interval [lo, hi] with a distinguished empty value. Endpoints
/// may be infinite. Arithmetic results are widened outward by a relative
/// 1e-12 per operation so that every pointwise result is contained.
class Interval {
public:
  static constexpr double kInflation = 1e-12;

  /// The empty interval.
  constexpr Interval() : lo_(std::numeric_limits<double>::infinity()), hi_(-std::numeric_limits<double>::infinity()) {}
  constexpr Interval(double value) : lo_(value), hi_(value) {}  // NOLINT: implicit by design of scalar templates
  constexpr Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(lo <= hi)) {
      lo_ = std::numeric_limits<double>::infinity();
      hi_ = -std::numeric_limits<double>::infinity();
    }
  }

  static constexpr Interval empty() { return Interval(); }
  static constexpr Interval entire() {
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
  static constexpr Interval nonnegative() { return {0.0, std::numeric_limits<double>::infinity()}; }
  static constexpr Interval nonpositive() { return {-std::numeric_limits<double>::infinity(), 0.0}; }

  constexpr double lo() const { return lo_; }
  constexpr double hi() const { return hi_; }
  constexpr bool is_empty() const { return !(lo_ <= hi_); }
  constexpr bool is_degenerate() const { return lo_ == hi_; }
  bool is_bounded() const { return std::isfinite(lo_) && std::isfinite(hi_); }

  double width() const { return is_empty() ? 0.0 : hi_ - lo_; }
  double mid() const;
  double magnitude() const { return is_empty() ? 0.0 : std::max(std::abs(lo_), std::abs(hi_)); }

  constexpr bool contains(double x) const { return lo_ <= x && x <= hi_; }
  constexpr bool contains(const Interval& o) const { return o.is_empty() || (lo_ <= o.lo_ && o.hi_ <= hi_); }

  friend constexpr bool operator==(const Interval& a, const Interval& b) {
    return (a.is_empty() && b.is_empty()) || (a.lo_ == b.lo_ && a.hi_ == b.hi_);
  }

private:
  double lo_;
  double hi_;
};

std::ostream& operator<<(std::ostream& os, const Interval& x);

/// Outward widening applied after every inexact operation.
Interval inflate(double lo, double hi);

Interval intersect(const Interval& a, const Interval& b);
Interval hull(const Interval& a, const Interval& b);

/// width / |midpoint|; zero-width intervals give 0, a zero midpoint gives +inf.
double relative_width(const Interval& x);

Interval operator-(const Interval& a);
Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator*(const Interval& a, const Interval& b);
/// Division by an interval containing zero returns a one-sided or entire hull
/// rather than a two-piece split.
Interval operator/(const Interval& a, const Interval& b);

Interval abs(const Interval& a);
Interval min(const Interval& a, const Interval& b);
Interval max(const Interval& a, const Interval& b);
Interval pow(const Interval& base, int exponent);
/// Integral degenerate exponents dispatch to the integer power; any other
/// exponent requires a nonnegative base and throws DomainError otherwise.
Interval pow(const Interval& base, const Interval& exponent);

/// Hill-type activation x^n / (x^n + theta^n), zero for x <= 0.
double sigmoid_plus(double x, double theta, double n);
Interval sigmoid_plus(const Interval& x, const Interval& theta, const Interval& n);

/// Real power with the same semantics as pow(Interval, Interval) on points.
double real_pow(double base, double exponent);

/// Integer value of x if it is an exact integer of moderate size.
std::optional<int> as_small_integer(double x);

enum class IntervalOp { Add, Sub, Mul, Div, Pow, Neg, Abs, Min, Max };

/// Applies a unary (Neg, Abs) or binary operation. Empty operands give the
/// empty interval.
Interval interval_apply(IntervalOp op, const Interval& a, const std::optional<Interval>& b = std::nullopt);

}  // namespace steadyscan
