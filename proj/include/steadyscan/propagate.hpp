#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "steadyscan/box.hpp"
#include "steadyscan/model.hpp"

namespace steadyscan {

constexpr double kDefaultPropagateTol = 1e-3;
constexpr std::size_t kDefaultMaxBoxes = 4096;

/// A constraint list compiled once into HC4 tapes. Contracting with the same
/// system many times (paving, the sampler's conditional boxes) reuses the
/// compiled form.
class ConstraintSystem {
public:
  ConstraintSystem() = default;
  ConstraintSystem(const std::vector<Constraint>& cs, SpacePtr space);

  std::size_t size() const { return tapes_.size(); }
  const SpacePtr& space() const { return space_; }

  /// One forward-backward pass of constraint i. Returns false when the
  /// forward pass proves the constraint unsatisfiable on dims (dims is then
  /// unspecified and should be treated as empty).
  bool revise(std::size_t i, std::vector<Interval>& dims) const;

  /// AC-3 style worklist until no revise shrinks a dimension by more than
  /// tol of its width. `active` selects a subset of constraints (empty means
  /// all). Returns false on inconsistency, storing the index of the
  /// constraint whose revise emptied the box in `failed` when given.
  bool fixpoint(std::vector<Interval>& dims, double tol = kDefaultPropagateTol, const std::vector<bool>& active = {},
                std::size_t* failed = nullptr) const;

  /// Unknown indices read by constraint i.
  const std::vector<int>& unknowns(std::size_t i) const { return tapes_[i].unknowns; }

  struct Op {
    NodeKind kind;
    int a = -1, b = -1, c = -1;  // child slots
    double value = 0.0;          // constants
    int index = -1;              // unknown leaves
  };
  struct Tape {
    std::vector<Op> ops;  // postorder; root last
    Interval target;
    std::vector<int> unknowns;
  };

private:
  SpacePtr space_;
  std::vector<Tape> tapes_;
  std::vector<std::vector<std::size_t>> watchers_;  // unknown -> constraints reading it
};

Box revise(const Constraint& c, const Box& b);
Box propagate_fixpoint(const std::vector<Constraint>& cs, const Box& b, double tol = kDefaultPropagateTol);

struct PaveOptions {
  /// Stop splitting a box once every dimension is at most this fraction of
  /// its width in the input box.
  double precision = 1e-2;
  std::size_t max_boxes = kDefaultMaxBoxes;
  double tol = kDefaultPropagateTol;
  int jobs = 1;
};

BoxUnion pave(const std::vector<Constraint>& cs, const Box& b, const PaveOptions& opt);
BoxUnion pave(const std::vector<Constraint>& cs, const Box& b, double precision,
              std::size_t max_boxes = kDefaultMaxBoxes);

/// One JSON object per line: unknown name -> [lo, hi]; infinite endpoints
/// are written as the strings "-inf"/"inf"; truncated boxes carry
/// "#truncated": true.
void write_jsonl(std::ostream& os, const BoxUnion& u);
BoxUnion read_jsonl(std::istream& is, const SpacePtr& space);

}  // namespace steadyscan
