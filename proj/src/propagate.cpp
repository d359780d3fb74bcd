#include "steadyscan/propagate.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <ostream>
#include <thread>

#include "json.hpp"

namespace steadyscan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Above this level 1 - f loses too many digits for the inverse to be sound.
constexpr double kSaturated = 0.999;

int emit(const Expr& e, ConstraintSystem::Tape& t) {
  ConstraintSystem::Op op{e.kind()};
  switch (e.kind()) {
    case NodeKind::Constant: op.value = e.value(); break;
    case NodeKind::Unknown:
      op.index = e.index();
      t.unknowns.push_back(e.index());
      break;
    case NodeKind::State: throw StructuralError("constraint references state '" + e.name() + "'");
    default:
      op.a = emit(e.arg(0), t);
      if (e.arity() > 1) op.b = emit(e.arg(1), t);
      if (e.arity() > 2) op.c = emit(e.arg(2), t);
  }
  t.ops.push_back(op);
  return static_cast<int>(t.ops.size()) - 1;
}

ConstraintSystem::Tape compile(const Constraint& c) {
  ConstraintSystem::Tape t;
  if (c.relation == Relation::In) {
    emit(c.lhs, t);
    t.target = c.range;
  } else {
    emit(c.rhs.is_constant(0.0) ? c.lhs : c.lhs - c.rhs, t);
    switch (c.relation) {
      case Relation::Eq: t.target = Interval(0.0); break;
      case Relation::Lt:
      case Relation::Le: t.target = Interval::nonpositive(); break;
      default: t.target = Interval::nonnegative(); break;
    }
  }
  std::sort(t.unknowns.begin(), t.unknowns.end());
  t.unknowns.erase(std::unique(t.unknowns.begin(), t.unknowns.end()), t.unknowns.end());
  return t;
}

// Preimage of z under x -> x^n for a positive integer n.
Interval integer_root(const Interval& z, int n, const Interval& x) {
  if (n == 1) return z;
  const double inv = 1.0 / n;
  if (n % 2 == 1) {
    auto r = [inv](double v) { return std::isinf(v) ? v : std::copysign(std::pow(std::abs(v), inv), v); };
    return inflate(r(z.lo()), r(z.hi()));
  }
  const Interval zp = intersect(z, Interval::nonnegative());
  if (zp.is_empty()) return zp;
  const double lo = n == 2 ? std::sqrt(zp.lo()) : std::pow(zp.lo(), inv);
  const double hi = n == 2 ? std::sqrt(zp.hi()) : std::pow(zp.hi(), inv);
  const Interval pos = inflate(lo, hi);
  return hull(intersect(x, pos), intersect(x, -pos));
}

// theta * (f / (1 - f))^(1/n) over the corners of theta and n; monotone in
// each argument separately.
double sigmoid_inverse_bound(double f, const Interval& theta, const Interval& n, bool upper) {
  const double ratio = f / (1.0 - f);
  double best = upper ? -kInf : kInf;
  for (double th : {theta.lo(), theta.hi()}) {
    for (double e : {n.lo(), n.hi()}) {
      const double v = th * std::pow(ratio, 1.0 / e);
      best = upper ? std::max(best, v) : std::min(best, v);
    }
  }
  return best;
}

// x * ((1 - f) / f)^(1/n), the threshold that maps x to level f.
double sigmoid_threshold_bound(double f, const Interval& x, const Interval& n, bool upper) {
  const double ratio = (1.0 - f) / f;
  double best = upper ? -kInf : kInf;
  for (double xv : {x.lo(), x.hi()}) {
    for (double e : {n.lo(), n.hi()}) {
      const double v = xv * std::pow(ratio, 1.0 / e);
      best = upper ? std::max(best, v) : std::min(best, v);
    }
  }
  return best;
}

}  // namespace

ConstraintSystem::ConstraintSystem(const std::vector<Constraint>& cs, SpacePtr space)
    : space_(std::move(space)), watchers_(space_ ? space_->size() : 0) {
  tapes_.reserve(cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i) {
    tapes_.push_back(compile(cs[i]));
    for (int u : tapes_.back().unknowns) {
      if (u < 0 || static_cast<std::size_t>(u) >= watchers_.size())
        throw StructuralError("constraint '" + cs[i].id + "' references an unknown outside the box");
      watchers_[u].push_back(i);
    }
  }
}

bool ConstraintSystem::revise(std::size_t ci, std::vector<Interval>& dims) const {
  const Tape& t = tapes_[ci];
  const std::size_t n = t.ops.size();
  // Small fixed buffer covers the usual constraint sizes without allocating.
  Interval small[64];
  std::vector<Interval> big;
  Interval* v = small;
  if (n > 64) {
    big.resize(n);
    v = big.data();
  }

  for (std::size_t i = 0; i < n; ++i) {
    const Op& op = t.ops[i];
    switch (op.kind) {
      case NodeKind::Constant: v[i] = Interval(op.value); break;
      case NodeKind::Unknown: v[i] = dims[op.index]; break;
      case NodeKind::State: return false;
      case NodeKind::Neg: v[i] = -v[op.a]; break;
      case NodeKind::Abs: v[i] = abs(v[op.a]); break;
      case NodeKind::Add: v[i] = v[op.a] + v[op.b]; break;
      case NodeKind::Sub: v[i] = v[op.a] - v[op.b]; break;
      case NodeKind::Mul: v[i] = v[op.a] * v[op.b]; break;
      case NodeKind::Div:
        if (v[op.b] == Interval(0.0)) return false;
        v[i] = v[op.a] / v[op.b];
        break;
      case NodeKind::Pow: {
        const Interval& e = v[op.b];
        if (!(e.is_degenerate() && as_small_integer(e.lo()))) {
          // outside the real domain of x^y; those points cannot satisfy c
          v[op.a] = intersect(v[op.a], Interval::nonnegative());
          if (v[op.a].is_empty()) return false;
        }
        v[i] = pow(v[op.a], e);
        break;
      }
      case NodeKind::Min: v[i] = min(v[op.a], v[op.b]); break;
      case NodeKind::Max: v[i] = max(v[op.a], v[op.b]); break;
      case NodeKind::SigmoidPlus:
        v[op.b] = intersect(v[op.b], Interval::nonnegative());
        if (v[op.b].is_empty()) return false;
        v[i] = sigmoid_plus(v[op.a], v[op.b], v[op.c]);
        break;
    }
    if (v[i].is_empty()) return false;
  }

  v[n - 1] = intersect(v[n - 1], t.target);
  if (v[n - 1].is_empty()) return false;

  auto narrow = [&](int slot, const Interval& proj) {
    v[slot] = intersect(v[slot], proj);
    return !v[slot].is_empty();
  };

  for (std::size_t k = n; k-- > 0;) {
    const Op& op = t.ops[k];
    const Interval z = v[k];
    switch (op.kind) {
      case NodeKind::Constant:
        break;
      case NodeKind::Unknown: {
        Interval& d = dims[op.index];
        d = intersect(d, z);
        if (d.is_empty()) return false;
        break;
      }
      case NodeKind::State: return false;
      case NodeKind::Neg:
        if (!narrow(op.a, -z)) return false;
        break;
      case NodeKind::Abs: {
        const Interval zp = intersect(z, Interval::nonnegative());
        if (!narrow(op.a, hull(intersect(v[op.a], zp), intersect(v[op.a], -zp)))) return false;
        break;
      }
      case NodeKind::Add:
        if (!narrow(op.a, z - v[op.b]) || !narrow(op.b, z - v[op.a])) return false;
        break;
      case NodeKind::Sub:
        if (!narrow(op.a, z + v[op.b]) || !narrow(op.b, v[op.a] - z)) return false;
        break;
      case NodeKind::Mul:
        if (!narrow(op.a, z / v[op.b]) || !narrow(op.b, z / v[op.a])) return false;
        break;
      case NodeKind::Div:
        if (!narrow(op.a, z * v[op.b]) || !narrow(op.b, v[op.a] / z)) return false;
        break;
      case NodeKind::Pow: {
        const Interval& e = v[op.b];
        if (!e.is_degenerate()) break;
        if (auto n_int = as_small_integer(e.lo())) {
          int p = *n_int;
          if (p == 0) break;
          Interval w = z;
          if (p < 0) {
            w = Interval(1.0) / z;
            p = -p;
          }
          if (!narrow(op.a, integer_root(w, p, v[op.a]))) return false;
        } else {
          const Interval zp = intersect(z, Interval::nonnegative());
          if (zp.is_empty()) return false;
          if (!narrow(op.a, pow(zp, Interval(1.0 / e.lo())))) return false;
        }
        break;
      }
      case NodeKind::Min:
        if (!narrow(op.a, Interval(z.lo(), kInf)) || !narrow(op.b, Interval(z.lo(), kInf))) return false;
        if (v[op.b].lo() > z.hi() && !narrow(op.a, z)) return false;
        if (v[op.a].lo() > z.hi() && !narrow(op.b, z)) return false;
        break;
      case NodeKind::Max:
        if (!narrow(op.a, Interval(-kInf, z.hi())) || !narrow(op.b, Interval(-kInf, z.hi()))) return false;
        if (v[op.b].hi() < z.lo() && !narrow(op.a, z)) return false;
        if (v[op.a].hi() < z.lo() && !narrow(op.b, z)) return false;
        break;
      case NodeKind::SigmoidPlus: {
        const Interval f = intersect(z, Interval(0.0, 1.0));
        if (f.is_empty()) return false;
        const Interval& th = v[op.b];
        const Interval& ex = v[op.c];
        if (ex.lo() <= 0.0 || !ex.is_bounded() || !th.is_bounded()) break;
        // x = theta * (f / (1 - f))^(1/n), increasing in f
        double xlo = -kInf;
        double xhi = kInf;
        if (f.lo() > 0.0 && th.lo() > 0.0) xlo = sigmoid_inverse_bound(f.lo(), th, ex, false);
        if (f.hi() < kSaturated) xhi = f.hi() == 0.0 ? 0.0 : sigmoid_inverse_bound(f.hi(), th, ex, true);
        if (xlo > -kInf || xhi < kInf) {
          if (!narrow(op.a, inflate(xlo, xhi))) return false;
        }
        // theta = x * ((1 - f) / f)^(1/n), decreasing in f; only for x > 0
        const Interval& x = v[op.a];
        if (x.lo() > 0.0 && x.is_bounded()) {
          double tlo = 0.0;
          double thi = kInf;
          if (f.hi() < kSaturated) tlo = sigmoid_threshold_bound(f.hi(), x, ex, false);
          if (f.lo() > 0.0) thi = sigmoid_threshold_bound(f.lo(), x, ex, true);
          if (!narrow(op.b, inflate(tlo, thi))) return false;
        }
        break;
      }
    }
  }
  return true;
}

bool ConstraintSystem::fixpoint(std::vector<Interval>& dims, double tol, const std::vector<bool>& active,
                                std::size_t* failed) const {
  const std::size_t m = tapes_.size();
  auto is_active = [&](std::size_t i) { return active.empty() || active[i]; };
  std::deque<std::size_t> queue;
  std::vector<char> queued(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    if (is_active(i)) {
      queue.push_back(i);
      queued[i] = 1;
    }
  }
  // A guard against slow geometric convergence; stopping early is still sound.
  std::size_t budget = 20000 + 400 * m;
  std::vector<double> before;
  while (!queue.empty() && budget-- > 0) {
    const std::size_t ci = queue.front();
    queue.pop_front();
    queued[ci] = 0;
    const auto& us = tapes_[ci].unknowns;
    before.resize(us.size());
    for (std::size_t k = 0; k < us.size(); ++k) before[k] = dims[us[k]].width();
    if (!revise(ci, dims)) {
      if (failed) *failed = ci;
      return false;
    }
    for (std::size_t k = 0; k < us.size(); ++k) {
      const double w0 = before[k];
      const double w1 = dims[us[k]].width();
      const bool shrunk = std::isinf(w0) ? !std::isinf(w1) : w1 < w0 - tol * w0;
      if (!shrunk) continue;
      for (std::size_t other : watchers_[us[k]]) {
        if (other != ci && !queued[other] && is_active(other)) {
          queue.push_back(other);
          queued[other] = 1;
        }
      }
    }
  }
  return true;
}

namespace {

Box empty_like(const Box& b) { return Box(b.space(), std::vector<Interval>(b.size(), Interval::empty())); }

}  // namespace

Box revise(const Constraint& c, const Box& b) {
  if (b.is_empty()) return b;
  ConstraintSystem sys({c}, b.space());
  std::vector<Interval> dims = b.dims();
  if (!sys.revise(0, dims)) return empty_like(b);
  return Box(b.space(), std::move(dims));
}

Box propagate_fixpoint(const std::vector<Constraint>& cs, const Box& b, double tol) {
  if (b.is_empty()) return b;
  ConstraintSystem sys(cs, b.space());
  std::vector<Interval> dims = b.dims();
  if (!sys.fixpoint(dims, tol)) return empty_like(b);
  return Box(b.space(), std::move(dims));
}

BoxUnion pave(const std::vector<Constraint>& cs, const Box& b, double precision, std::size_t max_boxes) {
  PaveOptions opt;
  opt.precision = precision;
  opt.max_boxes = max_boxes;
  return pave(cs, b, opt);
}

BoxUnion pave(const std::vector<Constraint>& cs, const Box& b, const PaveOptions& opt) {
  if (!(opt.precision > 0.0)) throw Error("pave precision must be positive");
  if (opt.max_boxes < 1) throw Error("pave needs max_boxes >= 1");
  BoxUnion out;
  if (b.is_empty()) return out;
  const ConstraintSystem sys(cs, b.space());
  const std::vector<double> initial = width(b);

  // Fraction of the initial width still left in dimension i.
  auto relative_to_start = [&](const Box& x, std::size_t i) {
    const double w0 = initial[i];
    const double w = x[i].width();
    if (!(w0 > 0.0) || std::isinf(w0) || std::isinf(w)) return 0.0;
    return w / w0;
  };

  std::vector<Box> frontier{b};
  std::vector<char> ok;
  while (!frontier.empty()) {
    ok.assign(frontier.size(), 0);
    auto contract = [&](std::size_t i) {
      std::vector<Interval> dims = frontier[i].dims();
      if (sys.fixpoint(dims, opt.tol)) {
        frontier[i] = Box(frontier[i].space(), std::move(dims));
        ok[i] = 1;
      }
    };
    const std::size_t jobs = std::max(1, opt.jobs);
    if (jobs == 1 || frontier.size() < 2) {
      for (std::size_t i = 0; i < frontier.size(); ++i) contract(i);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t j = 0; j < jobs; ++j) {
        pool.emplace_back([&, j] {
          for (std::size_t i = j; i < frontier.size(); i += jobs) contract(i);
        });
      }
      for (auto& t : pool) t.join();
    }

    std::vector<std::pair<Box, std::size_t>> to_split;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      if (!ok[i]) continue;
      std::size_t dim = 0;
      double worst = -1.0;
      for (std::size_t d = 0; d < frontier[i].size(); ++d) {
        const double r = relative_to_start(frontier[i], d);
        if (r > worst) {
          worst = r;
          dim = d;
        }
      }
      if (worst <= opt.precision)
        out.push_back(std::move(frontier[i]));
      else
        to_split.emplace_back(std::move(frontier[i]), dim);
    }

    // Each split adds one box to the eventual count.
    const std::size_t committed = out.size() + to_split.size();
    std::size_t can_split = committed >= opt.max_boxes ? 0 : opt.max_boxes - committed;
    std::vector<Box> next;
    for (auto& [box, dim] : to_split) {
      if (can_split == 0) {
        out.push_back(std::move(box), true);
        continue;
      }
      --can_split;
      auto [l, r] = split(box, dim);
      next.push_back(std::move(l));
      next.push_back(std::move(r));
    }
    frontier = std::move(next);
  }
  return out;
}

namespace {

nlohmann::json endpoint(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double endpoint(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw Error("bad interval endpoint '" + s + "'");
  }
  return j.get<double>();
}

}  // namespace

void write_jsonl(std::ostream& os, const BoxUnion& u) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Box& b = u.boxes[i];
    nlohmann::ordered_json rec;
    for (std::size_t d = 0; d < b.size(); ++d) {
      rec[b.space()->name(d)] = {endpoint(b[d].lo()), endpoint(b[d].hi())};
    }
    if (u.truncated[i]) rec["#truncated"] = true;
    os << rec.dump() << '\n';
  }
}

BoxUnion read_jsonl(std::istream& is, const SpacePtr& space) {
  BoxUnion u;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto rec = nlohmann::json::parse(line);
    std::vector<Interval> dims(space->size(), Interval::empty());
    std::size_t seen = 0;
    bool truncated = false;
    for (const auto& [key, val] : rec.items()) {
      if (key == "#truncated") {
        truncated = val.get<bool>();
        continue;
      }
      auto i = space->index(key);
      if (!i) throw StructuralError("box record names unknown '" + key + "' not in the model");
      dims[*i] = Interval(endpoint(val.at(0)), endpoint(val.at(1)));
      ++seen;
    }
    if (seen != space->size()) throw StructuralError("box record does not cover every unknown");
    u.push_back(Box(space, std::move(dims)), truncated);
  }
  return u;
}

}  // namespace steadyscan
