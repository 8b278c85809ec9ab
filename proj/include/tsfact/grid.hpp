#pragma once

// Truncated time scales whose points are all isolated.
//
// A TimeScaleGrid is a finite window of a (possibly unbounded) time scale.
// Each end carries a flag telling whether it is a genuine extremum of the
// time scale or a truncation cut. Operators are always built on the window
// itself, treated as a finite time scale; the flags only decide which
// indices count as trustworthy ("deep interior") when identities of the
// untruncated scale are checked.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tsfact/error.hpp"

namespace tsfact {

enum class GridKind { integer, q_lattice, qh_lattice, explicit_points };

inline std::string to_string(GridKind kind) {
  switch (kind) {
  case GridKind::integer: return "integer";
  case GridKind::q_lattice: return "q_lattice";
  case GridKind::qh_lattice: return "qh_lattice";
  case GridKind::explicit_points: return "explicit";
  }
  return "explicit";
}

inline GridKind grid_kind_from_string(const std::string& s) {
  if (s == "integer") return GridKind::integer;
  if (s == "q_lattice") return GridKind::q_lattice;
  if (s == "qh_lattice") return GridKind::qh_lattice;
  if (s == "explicit") return GridKind::explicit_points;
  throw GridError("unknown grid kind '" + s + "'");
}

enum class Direction { forward, backward };

/// Construction parameters. Only the fields relevant to the kind are read.
struct GridParams {
  // integer: points a, a+1, ..., b
  long a = 0;
  long b = 0;
  // q_lattice: c q^j for j = N..0;  qh_lattice: x_0 = c, x_j = q x_{j-1} + h
  double c = 1.0;
  double q = 0.5;
  double h = 0.0;
  long count = 0; // N
  // explicit
  std::vector<double> points;
  // end flags; unset means "kind default"
  int min_is_true_min = -1;
  int max_is_true_max = -1;
};

/// Membership flags aligned with the points of a grid.
struct IndexMask {
  std::vector<bool> member_flags;

  bool contains(std::size_t i) const {
    return i < member_flags.size() && member_flags[i];
  }
  std::size_t count() const {
    return static_cast<std::size_t>(
        std::count(member_flags.begin(), member_flags.end(), true));
  }
  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < member_flags.size(); ++i)
      if (member_flags[i]) out.push_back(i);
    return out;
  }
  bool empty() const { return count() == 0; }
};

/// Masks of the kappa-sets: T^k (max removed), T_k (min removed),
/// T^kk (max removed twice), T^k_k, plus the guarded deep interior.
struct KappaMasks {
  IndexMask kappa;
  IndexMask kappa_low;
  IndexMask kappa_kappa;
  IndexMask kappa_both;
  IndexMask deep_interior;
};

/// Inclusive index interval [lo, hi].
struct IndexRange {
  std::size_t lo = 0;
  std::size_t hi = 0;

  bool contains(std::size_t i) const { return lo <= i && i <= hi; }
  std::size_t size() const { return hi - lo + 1; }
};

class TimeScaleGrid {
public:
  TimeScaleGrid() = default;

  TimeScaleGrid(std::vector<double> points, bool min_is_true_min,
                bool max_is_true_max, GridKind kind = GridKind::explicit_points,
                GridParams params = {})
      : points_(std::move(points)), min_true_(min_is_true_min),
        max_true_(max_is_true_max), kind_(kind), params_(std::move(params)) {
    if (points_.size() < 4)
      throw GridError("a grid needs at least 4 points, got " +
                      std::to_string(points_.size()));
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (!std::isfinite(points_[i]))
        throw GridError("non-finite grid point at index " + std::to_string(i));
      if (i > 0 && !(points_[i] > points_[i - 1]))
        throw GridError("grid points must be strictly increasing (index " +
                        std::to_string(i) + ")");
    }
  }

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<double>& points() const noexcept { return points_; }
  double operator[](std::size_t i) const { return points_[i]; }
  double point(std::size_t i) const { return points_.at(i); }

  bool min_is_true_min() const noexcept { return min_true_; }
  bool max_is_true_max() const noexcept { return max_true_; }
  GridKind kind() const noexcept { return kind_; }
  const GridParams& params() const noexcept { return params_; }

  /// Index of sigma(x_i) (forward) or rho(x_i) (backward). The top point is
  /// its own forward jump (inf {} := max T), the bottom its own backward jump.
  std::size_t jump(std::size_t i, Direction dir) const {
    check_index(i);
    if (dir == Direction::forward) return i + 1 < size() ? i + 1 : i;
    return i > 0 ? i - 1 : 0;
  }

  /// mu(x_i) = sigma(x_i) - x_i, defined for i < n-1.
  double graininess(std::size_t i) const {
    if (i + 1 >= size())
      throw GridError("graininess is undefined at the top point");
    return points_[i + 1] - points_[i];
  }

  /// Graininess on T^k (length n-1).
  std::vector<double> graininess() const {
    std::vector<double> mu(size() - 1);
    for (std::size_t i = 0; i + 1 < size(); ++i) mu[i] = points_[i + 1] - points_[i];
    return mu;
  }

  /// Delta-measure point masses; the top point carries zero mass.
  std::vector<double> point_masses() const {
    std::vector<double> m(size(), 0.0);
    for (std::size_t i = 0; i + 1 < size(); ++i) m[i] = points_[i + 1] - points_[i];
    return m;
  }

  // Window masks: the window regarded as a finite time scale.
  bool in_kappa(std::size_t i) const noexcept { return i + 1 < size(); }
  bool in_kappa_kappa(std::size_t i) const noexcept { return i + 2 < size(); }
  bool in_kappa_both(std::size_t i) const noexcept {
    return i >= 1 && i + 1 < size();
  }
  double chi_kappa_kappa(std::size_t i) const noexcept {
    return in_kappa_kappa(i) ? 1.0 : 0.0;
  }
  double chi_kappa_both(std::size_t i) const noexcept {
    return in_kappa_both(i) ? 1.0 : 0.0;
  }
  /// Number of points in T^k of the window.
  std::size_t kappa_size() const noexcept { return size() - 1; }

  /// Indices where identities of the untruncated scale hold exactly on the
  /// window. Rows 0 and n-2 are always excluded (the window's own boundary
  /// masks act there); at a truncation cut, guard_width further indices go.
  IndexRange deep_interior(std::size_t guard_width) const {
    const std::size_t lo = min_true_ ? 1 : std::max<std::size_t>(1, guard_width);
    const long hi = static_cast<long>(size()) - 3 -
                    (max_true_ ? 0 : static_cast<long>(guard_width));
    if (hi < static_cast<long>(lo))
      throw GridError("deep interior is empty for guard width " +
                      std::to_string(guard_width) + " on " +
                      std::to_string(size()) + " points");
    return {lo, static_cast<std::size_t>(hi)};
  }

  /// Rows of T^k unaffected by a truncation cut: all of T^k at a genuine
  /// extremum, guard_width rows fewer at a cut.
  IndexRange trusted_rows(std::size_t guard_width) const {
    const std::size_t lo = min_true_ ? 0 : guard_width;
    const long hi = static_cast<long>(size()) - 2 -
                    (max_true_ ? 0 : static_cast<long>(guard_width));
    if (hi < static_cast<long>(lo)) throw GridError("no trusted rows for this guard width");
    return {lo, static_cast<std::size_t>(hi)};
  }

  /// Kappa-set masks honouring the end flags: a cut end is not removed.
  KappaMasks kappa_masks(std::size_t guard_width) const {
    const std::size_t n = size();
    KappaMasks m;
    m.kappa.member_flags.assign(n, true);
    if (max_true_) m.kappa.member_flags[n - 1] = false;
    m.kappa_low.member_flags.assign(n, true);
    if (min_true_) m.kappa_low.member_flags[0] = false;
    m.kappa_kappa = m.kappa;
    {
      auto idx = m.kappa.indices();
      m.kappa_kappa.member_flags[idx.back()] = false;
    }
    m.kappa_both.member_flags.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      m.kappa_both.member_flags[i] = m.kappa.contains(i) && m.kappa_low.contains(i);
    const IndexRange deep = deep_interior(guard_width);
    m.deep_interior.member_flags.assign(n, false);
    for (std::size_t i = deep.lo; i <= deep.hi; ++i)
      m.deep_interior.member_flags[i] = m.kappa_kappa.contains(i) && m.kappa_low.contains(i);
    if (m.deep_interior.empty())
      throw GridError("deep interior is empty");
    return m;
  }

  /// The same window with its top point removed; the new top inherits the
  /// max flag. Used for the weight support of successive chain levels.
  TimeScaleGrid drop_top() const {
    std::vector<double> p(points_.begin(), points_.end() - 1);
    return TimeScaleGrid(std::move(p), min_true_, max_true_, kind_, params_);
  }

  /// True when `other` equals this grid truncated to other.size() points.
  bool has_prefix(const TimeScaleGrid& other) const {
    if (other.size() > size()) return false;
    return std::equal(other.points_.begin(), other.points_.end(), points_.begin());
  }

  friend bool operator==(const TimeScaleGrid& l, const TimeScaleGrid& r) {
    return l.points_ == r.points_ && l.min_true_ == r.min_true_ &&
           l.max_true_ == r.max_true_;
  }

private:
  void check_index(std::size_t i) const {
    if (i >= size()) throw GridError("index " + std::to_string(i) + " out of range");
  }

  std::vector<double> points_;
  bool min_true_ = true;
  bool max_true_ = true;
  GridKind kind_ = GridKind::explicit_points;
  GridParams params_;
};

/// Instantiate a grid of the given kind.
inline TimeScaleGrid build_grid(GridKind kind, const GridParams& p) {
  auto flag = [](int v, bool dflt) { return v < 0 ? dflt : v != 0; };
  switch (kind) {
  case GridKind::integer: {
    if (p.a > p.b - 3)
      throw GridError("integer grid needs a <= b-3 (at least 4 points)");
    std::vector<double> pts;
    for (long x = p.a; x <= p.b; ++x) pts.push_back(static_cast<double>(x));
    return TimeScaleGrid(std::move(pts), flag(p.min_is_true_min, true),
                         flag(p.max_is_true_max, true), kind, p);
  }
  case GridKind::q_lattice:
  case GridKind::qh_lattice: {
    if (!(p.q > 0.0 && p.q < 1.0)) throw GridError("q must lie in (0, 1)");
    if (p.c == 0.0) throw GridError("q-lattice needs c != 0");
    if (p.count < 3) throw GridError("q-lattice needs N >= 3 (at least 4 points)");
    const double shift = kind == GridKind::qh_lattice ? p.h : 0.0;
    // repeated multiplication keeps adjacent ratios as close to q as possible
    std::vector<double> pts(static_cast<std::size_t>(p.count) + 1);
    pts[0] = p.c;
    for (std::size_t j = 1; j < pts.size(); ++j) pts[j] = pts[j - 1] * p.q + shift;
    std::sort(pts.begin(), pts.end());
    // the accumulation point sits at the small end for c > 0 (h = 0)
    const bool acc_below = p.c > 0.0;
    return TimeScaleGrid(std::move(pts), flag(p.min_is_true_min, !acc_below),
                         flag(p.max_is_true_max, acc_below), kind, p);
  }
  case GridKind::explicit_points:
    return TimeScaleGrid(p.points, flag(p.min_is_true_min, true),
                         flag(p.max_is_true_max, true), kind, p);
  }
  throw GridError("unknown grid kind");
}

inline TimeScaleGrid build_grid(const std::string& kind, const GridParams& p) {
  return build_grid(grid_kind_from_string(kind), p);
}

inline TimeScaleGrid integer_grid(long a, long b, bool min_true = true,
                                  bool max_true = true) {
  GridParams p;
  p.a = a;
  p.b = b;
  p.min_is_true_min = min_true;
  p.max_is_true_max = max_true;
  return build_grid(GridKind::integer, p);
}

} // namespace tsfact
