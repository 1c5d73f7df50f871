#include "lamlab/kset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lamlab::kset {

namespace {

void check_inside_range(const std::vector<Interval>& ms, double a, double b) {
  for (const auto& iv : ms) {
    if (iv.lo > iv.hi) throw std::invalid_argument("kset: interval with lo > hi");
    if (!(iv.lo > a && iv.hi < b))
      throw std::invalid_argument("kset: member not strictly inside ambient range");
  }
  for (std::size_t i = 1; i < ms.size(); ++i)
    if (!(ms[i].lo > ms[i - 1].hi))
      throw std::invalid_argument("kset: members not disjoint and sorted");
}

}  // namespace

ClosedSetSpec ClosedSetSpec::finite_points(std::vector<double> zs, double a, double b) {
  std::sort(zs.begin(), zs.end());
  ClosedSetSpec k;
  k.kind = Kind::Points;
  k.points = std::move(zs);
  k.range_lo = a;
  k.range_hi = b;
  check_inside_range(k.members(), a, b);
  return k;
}

ClosedSetSpec ClosedSetSpec::interval_union(std::vector<Interval> ivs, double a, double b) {
  std::sort(ivs.begin(), ivs.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
  ClosedSetSpec k;
  k.kind = Kind::Intervals;
  k.intervals = std::move(ivs);
  k.range_lo = a;
  k.range_hi = b;
  check_inside_range(k.members(), a, b);
  return k;
}

ClosedSetSpec ClosedSetSpec::cantor(Interval base, int depth, double a, double b) {
  ClosedSetSpec k;
  k.kind = Kind::Cantor;
  k.base = base;
  k.depth = depth;
  k.range_lo = a;
  k.range_hi = b;
  check_inside_range(k.members(), a, b);
  return k;
}

std::vector<Interval> ClosedSetSpec::members() const {
  switch (kind) {
    case Kind::Points: {
      std::vector<Interval> ms;
      ms.reserve(points.size());
      for (double z : points) ms.push_back({z, z});
      return ms;
    }
    case Kind::Intervals:
      return intervals;
    case Kind::Cantor:
      return cantor_intervals(base, depth);
  }
  return {};
}

std::vector<Interval> cantor_intervals(Interval base, int depth) {
  if (depth < 0) throw std::invalid_argument("cantor_intervals: depth must be >= 0");
  if (depth > 20) throw std::invalid_argument("cantor_intervals: depth > 20 rejected (size guard)");
  if (!(base.hi > base.lo)) throw std::invalid_argument("cantor_intervals: degenerate base");
  std::vector<Interval> cur{base};
  for (int d = 0; d < depth; ++d) {
    std::vector<Interval> next;
    next.reserve(cur.size() * 2);
    for (const auto& iv : cur) {
      const double third = (iv.hi - iv.lo) / 3.0;
      next.push_back({iv.lo, iv.lo + third});
      next.push_back({iv.hi - third, iv.hi});
    }
    cur = std::move(next);
  }
  return cur;
}

double distance(double z, const ClosedSetSpec& k) {
  const auto ms = k.members();
  if (ms.empty()) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& iv : ms) {
    double d = 0;
    if (z < iv.lo)
      d = iv.lo - z;
    else if (z > iv.hi)
      d = z - iv.hi;
    best = std::min(best, d);
  }
  return best;
}

std::vector<Interval> complement_components(const ClosedSetSpec& k) {
  const auto ms = k.members();
  std::vector<Interval> comps;
  double cursor = k.range_lo;
  for (const auto& iv : ms) {
    if (iv.lo > cursor) comps.push_back({cursor, iv.lo});
    cursor = iv.hi;
  }
  if (k.range_hi > cursor) comps.push_back({cursor, k.range_hi});
  return comps;
}

std::vector<double> sample_points(const ClosedSetSpec& k) {
  std::vector<double> pts;
  for (const auto& iv : k.members()) {
    pts.push_back(iv.lo);
    if (iv.hi > iv.lo) pts.push_back(iv.hi);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace lamlab::kset
