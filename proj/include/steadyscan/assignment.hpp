#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "steadyscan/box.hpp"
#include "steadyscan/expr.hpp"

namespace steadyscan {

enum class Provenance : std::uint8_t { Unassigned, Sampled, Deduced, Fixed };

const char* to_string(Provenance p);

/// Partial map unknown -> value over a Space, with per-entry provenance.
class Assignment {
public:
  Assignment() = default;
  explicit Assignment(SpacePtr space);

  const SpacePtr& space() const { return space_; }
  std::size_t size() const { return values_.size(); }

  bool has(std::size_t i) const { return provenance_[i] != Provenance::Unassigned; }
  bool has(const std::string& name) const;
  double value(std::size_t i) const { return values_[i]; }
  double at(const std::string& name) const;
  Provenance provenance(std::size_t i) const { return provenance_[i]; }

  void set(std::size_t i, double v, Provenance p = Provenance::Fixed);
  void set(const std::string& name, double v, Provenance p = Provenance::Fixed);
  void clear(std::size_t i);

  bool total() const;
  std::size_t assigned_count() const;
  const std::vector<double>& values() const { return values_; }

private:
  SpacePtr space_;
  std::vector<double> values_;
  std::vector<Provenance> provenance_;
};

/// Exact evaluation; throws MissingValueError naming the first unassigned
/// reference (state references are never assigned here).
double eval_point(const Expr& e, const Assignment& a);

/// Natural interval extension over the box (contains every eval_point on it).
Interval eval_interval(const Expr& e, const Box& b);

}  // namespace steadyscan
