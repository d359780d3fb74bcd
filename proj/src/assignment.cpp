#include "steadyscan/assignment.hpp"

#include <algorithm>

namespace steadyscan {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Unassigned: return "unassigned";
    case Provenance::Sampled: return "sampled";
    case Provenance::Deduced: return "deduced";
    case Provenance::Fixed: return "fixed";
  }
  return "?";
}

Assignment::Assignment(SpacePtr space)
    : space_(std::move(space)),
      values_(space_ ? space_->size() : 0, 0.0),
      provenance_(space_ ? space_->size() : 0, Provenance::Unassigned) {}

bool Assignment::has(const std::string& name) const {
  auto i = space_->index(name);
  return i && has(*i);
}

double Assignment::at(const std::string& name) const {
  auto i = space_->index(name);
  if (!i || !has(*i)) throw MissingValueError(name);
  return values_[*i];
}

void Assignment::set(std::size_t i, double v, Provenance p) {
  values_.at(i) = v;
  provenance_.at(i) = p == Provenance::Unassigned ? Provenance::Fixed : p;
}

void Assignment::set(const std::string& name, double v, Provenance p) {
  auto i = space_->index(name);
  if (!i) throw StructuralError("assignment has no unknown '" + name + "'");
  set(*i, v, p);
}

void Assignment::clear(std::size_t i) {
  values_.at(i) = 0.0;
  provenance_.at(i) = Provenance::Unassigned;
}

bool Assignment::total() const {
  return std::none_of(provenance_.begin(), provenance_.end(),
                      [](Provenance p) { return p == Provenance::Unassigned; });
}

std::size_t Assignment::assigned_count() const {
  return static_cast<std::size_t>(std::count_if(provenance_.begin(), provenance_.end(),
                                                [](Provenance p) { return p != Provenance::Unassigned; }));
}

double eval_point(const Expr& e, const Assignment& a) {
  return evaluate<double>(e, [&](NodeKind kind, int index, const std::string& name) -> double {
    if (kind != NodeKind::Unknown || index < 0 || static_cast<std::size_t>(index) >= a.size() ||
        !a.has(static_cast<std::size_t>(index)))
      throw MissingValueError(name);
    return a.value(static_cast<std::size_t>(index));
  });
}

Interval eval_interval(const Expr& e, const Box& b) {
  return evaluate<Interval>(e, [&](NodeKind kind, int index, const std::string& name) -> Interval {
    if (kind != NodeKind::Unknown || index < 0 || static_cast<std::size_t>(index) >= b.size())
      throw MissingValueError(name);
    return b[static_cast<std::size_t>(index)];
  });
}

}  // namespace steadyscan
