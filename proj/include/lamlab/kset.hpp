#pragma once

#include <vector>

namespace lamlab::kset {

struct Interval {
  double lo = 0;
  double hi = 0;
  double length() const { return hi - lo; }
};

enum class Kind { Points, Intervals, Cantor };

/// The prescribed relatively closed subset K of the axis segment (a,b),
/// always a finite union of points and closed intervals at runtime.
struct ClosedSetSpec {
  Kind kind = Kind::Points;
  std::vector<double> points;        // Kind::Points
  std::vector<Interval> intervals;   // Kind::Intervals
  Interval base{0, 1};               // Kind::Cantor
  int depth = 0;                     // Kind::Cantor
  double range_lo = -0.5;
  double range_hi = 0.5;

  static ClosedSetSpec finite_points(std::vector<double> zs, double a, double b);
  static ClosedSetSpec interval_union(std::vector<Interval> ivs, double a, double b);
  static ClosedSetSpec cantor(Interval base, int depth, double a, double b);

  /// Canonical sorted member list; points appear as degenerate [z,z] intervals.
  std::vector<Interval> members() const;
  bool empty() const { return members().empty(); }
};

/// The 2^depth closed intervals of the depth-m middle-thirds construction,
/// sorted.  depth > 20 is rejected as a size guard.
std::vector<Interval> cantor_intervals(Interval base, int depth);

/// Exact Euclidean distance from z to the union of members (+inf when empty).
double distance(double z, const ClosedSetSpec& k);

/// Maximal open intervals of (a,b) \ K, sorted.
std::vector<Interval> complement_components(const ClosedSetSpec& k);

/// Member endpoints, deduplicated and sorted (one sample per point member,
/// two per nondegenerate interval).  These are where the blow-up tables probe.
std::vector<double> sample_points(const ClosedSetSpec& k);

}  // namespace lamlab::kset
