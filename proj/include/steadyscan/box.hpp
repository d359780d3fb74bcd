#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "steadyscan/interval.hpp"

namespace steadyscan {

/// Ordered set of unique unknown names; the coordinate system of a Box.
class Space {
public:
  Space() = default;
  explicit Space(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> index(const std::string& name) const;

  friend bool operator==(const Space& a, const Space& b) { return a.names_ == b.names_; }

private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

using SpacePtr = std::shared_ptr<const Space>;

SpacePtr make_space(std::vector<std::string> names);

/// Cartesian product of intervals over the unknowns of a Space, in
/// declaration order.
class Box {
public:
  Box() = default;
  Box(SpacePtr space, std::vector<Interval> dims);
  /// Convenience for tests and small problems.
  Box(std::initializer_list<std::pair<std::string, Interval>> dims);

  const SpacePtr& space() const { return space_; }
  std::size_t size() const { return dims_.size(); }
  const Interval& operator[](std::size_t i) const { return dims_[i]; }
  Interval& operator[](std::size_t i) { return dims_[i]; }
  const Interval& at(const std::string& name) const;
  Interval& at(const std::string& name);
  const std::vector<Interval>& dims() const { return dims_; }

  bool is_empty() const;
  /// Product of widths; zero-width dimensions contribute a factor of 0.
  double volume() const;

  friend bool operator==(const Box& a, const Box& b);

private:
  SpacePtr space_;
  std::vector<Interval> dims_;
};

/// Throws StructuralError unless both boxes range over the same unknowns.
void require_same_space(const Box& a, const Box& b);

Box intersect(const Box& a, const Box& b);
Box hull(const Box& a, const Box& b);
std::vector<double> width(const Box& b);
std::vector<double> midpoint(const Box& b);

/// Largest relative width (width / |midpoint|), ties to the earliest
/// declared dimension.
std::size_t widest_relative_dimension(const Box& b);

/// Bisects `dim` (default: widest relative width) at its midpoint.
std::pair<Box, Box> split(const Box& b, std::optional<std::size_t> dim = std::nullopt);

/// Finite union of boxes over one Space. Overlaps are allowed; an empty list
/// is the empty set.
struct BoxUnion {
  std::vector<Box> boxes;
  /// Parallel to `boxes`: true when paving stopped on the box budget before
  /// the box reached the requested precision.
  std::vector<bool> truncated;

  bool empty() const { return boxes.empty(); }
  std::size_t size() const { return boxes.size(); }
  void push_back(Box b, bool was_truncated = false) {
    boxes.push_back(std::move(b));
    truncated.push_back(was_truncated);
  }
  double volume() const;
  /// Per-dimension hull over all boxes.
  Box hull() const;
};

}  // namespace steadyscan
