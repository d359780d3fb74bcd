#include "steadyscan/box.hpp"

#include <algorithm>

#include "steadyscan/errors.hpp"

namespace steadyscan {

Space::Space(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) throw StructuralError("duplicate unknown '" + names_[i] + "'");
  }
}

std::optional<std::size_t> Space::index(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SpacePtr make_space(std::vector<std::string> names) {
  return std::make_shared<const Space>(std::move(names));
}

Box::Box(SpacePtr space, std::vector<Interval> dims) : space_(std::move(space)), dims_(std::move(dims)) {
  if (!space_ || space_->size() != dims_.size()) throw StructuralError("box dimension count does not match its space");
}

Box::Box(std::initializer_list<std::pair<std::string, Interval>> dims) {
  std::vector<std::string> names;
  for (const auto& [name, iv] : dims) {
    names.push_back(name);
    dims_.push_back(iv);
  }
  space_ = make_space(std::move(names));
}

const Interval& Box::at(const std::string& name) const {
  auto i = space_ ? space_->index(name) : std::nullopt;
  if (!i) throw StructuralError("box has no unknown '" + name + "'");
  return dims_[*i];
}

Interval& Box::at(const std::string& name) {
  return const_cast<Interval&>(std::as_const(*this).at(name));
}

bool Box::is_empty() const {
  return std::any_of(dims_.begin(), dims_.end(), [](const Interval& x) { return x.is_empty(); });
}

double Box::volume() const {
  if (is_empty()) return 0.0;
  double v = 1.0;
  for (const auto& d : dims_) v *= d.width();
  return v;
}

bool operator==(const Box& a, const Box& b) {
  if (a.space_ != b.space_ && !(a.space_ && b.space_ && *a.space_ == *b.space_)) return false;
  return a.dims_ == b.dims_;
}

void require_same_space(const Box& a, const Box& b) {
  if (a.space() == b.space()) return;
  if (!a.space() || !b.space() || !(*a.space() == *b.space()))
    throw StructuralError("boxes range over different unknown sets");
}

Box intersect(const Box& a, const Box& b) {
  require_same_space(a, b);
  std::vector<Interval> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = intersect(a[i], b[i]);
  return {a.space(), std::move(d)};
}

Box hull(const Box& a, const Box& b) {
  require_same_space(a, b);
  std::vector<Interval> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = hull(a[i], b[i]);
  return {a.space(), std::move(d)};
}

std::vector<double> width(const Box& b) {
  std::vector<double> w(b.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = b[i].width();
  return w;
}

std::vector<double> midpoint(const Box& b) {
  std::vector<double> m(b.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = b[i].mid();
  return m;
}

std::size_t widest_relative_dimension(const Box& b) {
  std::size_t best = 0;
  double best_w = -1.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double w = relative_width(b[i]);
    if (w > best_w) {
      best_w = w;
      best = i;
    }
  }
  return best;
}

std::pair<Box, Box> split(const Box& b, std::optional<std::size_t> dim) {
  if (b.size() == 0) throw StructuralError("cannot split a zero-dimensional box");
  const std::size_t k = dim.value_or(widest_relative_dimension(b));
  if (k >= b.size()) throw StructuralError("split dimension out of range");
  const double m = b[k].mid();
  Box left = b;
  Box right = b;
  left[k] = Interval(b[k].lo(), m);
  right[k] = Interval(m, b[k].hi());
  return {std::move(left), std::move(right)};
}

double BoxUnion::volume() const {
  double v = 0.0;
  for (const auto& b : boxes) v += b.volume();
  return v;
}

Box BoxUnion::hull() const {
  if (boxes.empty()) return {};
  Box h = boxes.front();
  for (std::size_t i = 1; i < boxes.size(); ++i) h = steadyscan::hull(h, boxes[i]);
  return h;
}

}  // namespace steadyscan
