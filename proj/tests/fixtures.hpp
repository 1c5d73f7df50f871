#pragma once

// Shared analytic fixtures and independent oracles for the test suites.

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "lamlab/boundary.hpp"
#include "lamlab/geom.hpp"
#include "lamlab/kset.hpp"
#include "lamlab/plateau.hpp"

namespace fixtures {

using lamlab::Vec3;
using lamlab::geom::TriMesh;

constexpr double kPi = 3.14159265358979323846;

// Polar graph mesh z = f(r, theta) over [r0,r1] x [t0,t1], grid-structured
// with the same quad split and chart layout the solver uses.
inline TriMesh polar_graph(int nr, int nt, double r0, double r1, double t0, double t1,
                           const std::function<double(double, double)>& f) {
  TriMesh m;
  m.grid_rows = nr + 1;
  m.grid_cols = nt + 1;
  m.V.resize((nr + 1) * (nt + 1), 3);
  for (int i = 0; i <= nr; ++i)
    for (int j = 0; j <= nt; ++j) {
      const double r = r0 + (r1 - r0) * i / nr;
      const double th = t0 + (t1 - t0) * j / nt;
      m.V.row(m.grid_vertex(i, j)) = Vec3(r * std::cos(th), r * std::sin(th), f(r, th));
    }
  m.F.resize(2 * nr * nt, 3);
  long k = 0;
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nt; ++j) {
      const int v00 = m.grid_vertex(i, j), v01 = m.grid_vertex(i, j + 1);
      const int v10 = m.grid_vertex(i + 1, j), v11 = m.grid_vertex(i + 1, j + 1);
      m.F.row(k++) = Eigen::Vector3i(v00, v11, v10);
      m.F.row(k++) = Eigen::Vector3i(v00, v01, v11);
    }
  m.init_attributes();
  lamlab::geom::recompute_boundary_flags(m);
  for (int i = 0; i <= nr; ++i)
    for (int j = 0; j <= nt; ++j) {
      const int v = m.grid_vertex(i, j);
      m.chart_r[v] = r0 + (r1 - r0) * i / nr;
      m.chart_theta[v] = t0 + (t1 - t0) * j / nt;
    }
  return m;
}

// Helicoid z = lam * theta sampled exactly on the solver's grid layout
// (axis row at r = 0, helix row at r = 1), via the boundary pipeline.
inline TriMesh helicoid_grid(int nr, int m_cols, double lam, double z0 = 0.0,
                             double turns = 1.0) {
  lamlab::boundary::ProfileParams pp;
  pp.n = 1;
  pp.lambda0 = 1.0 / lam;
  pp.eta = 0.0;
  pp.a = z0;
  pp.b = z0 + 2.0 * kPi * lam * turns;
  auto K = lamlab::kset::ClosedSetSpec::finite_points({}, pp.a, pp.b);
  auto prof = lamlab::boundary::build_profile(K, pp);
  auto s = lamlab::boundary::sample_gamma(prof, prof.total_angle() / (m_cols - 1) + 1e-12,
                                          (pp.b - pp.a) / (m_cols - 1) + 1e-12);
  auto loop = lamlab::boundary::assemble_boundary(s, pp.a, pp.b, nr);
  return lamlab::plateau::initial_mesh(loop, nr);
}

inline lamlab::boundary::BoundaryLoop helicoid_loop(int nr, int m_cols, double lam) {
  lamlab::boundary::ProfileParams pp;
  pp.n = 1;
  pp.lambda0 = 1.0 / lam;
  pp.eta = 0.0;
  pp.a = 0.0;
  pp.b = 2.0 * kPi * lam;
  auto K = lamlab::kset::ClosedSetSpec::finite_points({}, pp.a, pp.b);
  auto prof = lamlab::boundary::build_profile(K, pp);
  auto s = lamlab::boundary::sample_gamma(prof, prof.total_angle() / (m_cols - 1) + 1e-12,
                                          (pp.b - pp.a) / (m_cols - 1) + 1e-12);
  return lamlab::boundary::assemble_boundary(s, pp.a, pp.b, nr);
}

// Flat unit disk as a polar grid at height z.
inline TriMesh flat_disk(int nr, int nt, double z) {
  return polar_graph(nr, nt, 0.02, 1.0, 0.0, 2.0 * kPi, [z](double, double) { return z; });
}

// Icosphere (closed mesh) for the Gauss-Bonnet sanity check.
inline TriMesh icosphere(int subdivisions) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> vs = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                          {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                          {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : vs) v.normalize();
  std::vector<Eigen::Vector3i> fs = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find({key.first, key.second});
      if (it != midpoint.end()) return it->second;
      Vec3 p = (vs[a] + vs[b]).normalized();
      vs.push_back(p);
      const int id = static_cast<int>(vs.size()) - 1;
      midpoint[{key.first, key.second}] = id;
      return id;
    };
    std::vector<Eigen::Vector3i> next;
    for (const auto& f : fs) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    fs = std::move(next);
  }
  TriMesh m;
  m.V.resize(vs.size(), 3);
  for (std::size_t i = 0; i < vs.size(); ++i) m.V.row(i) = vs[i];
  m.F.resize(fs.size(), 3);
  for (std::size_t i = 0; i < fs.size(); ++i) m.F.row(i) = fs[i];
  m.init_attributes();
  return m;
}

// Brute-force oracle for mesh_distance: all vertex-triangle pairs, same
// region rule (source vertices inside, target triangles fully inside).
inline double brute_mesh_distance(const TriMesh& a, const TriMesh& b,
                                  const lamlab::geom::RegionPred& region) {
  auto one_sided = [&region](const TriMesh& from, const TriMesh& to) {
    double best = std::numeric_limits<double>::infinity();
    for (int v = 0; v < from.vertex_count(); ++v) {
      if (!region(from.V.row(v))) continue;
      for (int f = 0; f < to.face_count(); ++f) {
        bool inside = true;
        for (int k = 0; k < 3; ++k)
          if (!region(to.V.row(to.F(f, k)))) inside = false;
        if (!inside) continue;
        best = std::min(best, lamlab::geom::point_triangle_distance(
                                  from.V.row(v), to.V.row(to.F(f, 0)), to.V.row(to.F(f, 1)),
                                  to.V.row(to.F(f, 2))));
      }
    }
    return best;
  };
  return std::min(one_sided(a, b), one_sided(b, a));
}

// Independent middle-thirds enumeration (recursive, endpoint arithmetic kept
// separate from the production code path).
inline void cantor_oracle(double lo, double hi, int depth,
                          std::vector<std::pair<double, double>>& out) {
  if (depth == 0) {
    out.push_back({lo, hi});
    return;
  }
  const double third = (hi - lo) / 3.0;
  cantor_oracle(lo, lo + third, depth - 1, out);
  cantor_oracle(hi - third, hi, depth - 1, out);
}

// Dense trapezoid quadrature with kink-aligned panels.
inline double trapezoid_oracle(const std::function<double(double)>& f,
                               const std::vector<double>& breakpoints, long panels_per_piece) {
  double total = 0;
  for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
    const double a = breakpoints[p], b = breakpoints[p + 1];
    double sum = 0.5 * (f(a) + f(b));
    for (long i = 1; i < panels_per_piece; ++i)
      sum += f(a + (b - a) * i / panels_per_piece);
    total += sum * (b - a) / panels_per_piece;
  }
  return total;
}

inline std::mt19937& rng() {
  static std::mt19937 gen(20260808u);
  return gen;
}

inline Vec3 random_point(double scale = 2.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  return Vec3(d(rng()), d(rng()), d(rng()));
}

}  // namespace fixtures
