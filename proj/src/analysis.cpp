#include "lamlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

#include "lamlab/io.hpp"
#include "lamlab/plateau.hpp"

namespace lamlab::analysis {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

Eigen::VectorXd angle_defects(const geom::TriMesh& m) {
  Eigen::VectorXd defect = Eigen::VectorXd::Constant(m.vertex_count(), 2.0 * kPi);
  for (int f = 0; f < m.face_count(); ++f) {
    const Vec3 p[3] = {m.V.row(m.F(f, 0)), m.V.row(m.F(f, 1)), m.V.row(m.F(f, 2))};
    for (int k = 0; k < 3; ++k) {
      const Vec3 e1 = (p[(k + 1) % 3] - p[k]);
      const Vec3 e2 = (p[(k + 2) % 3] - p[k]);
      const double denom = e1.norm() * e2.norm();
      if (denom <= 1e-300) continue;
      const double c = std::clamp(e1.dot(e2) / denom, -1.0, 1.0);
      defect[m.F(f, k)] -= std::acos(c);
    }
  }
  return defect;
}

Eigen::VectorXd vertex_curvature(const geom::TriMesh& m) {
  const Eigen::VectorXd defect = angle_defects(m);
  const Eigen::VectorXd areas = plateau::mixed_voronoi_areas(m);
  Eigen::VectorXd absA =
      Eigen::VectorXd::Constant(m.vertex_count(), std::numeric_limits<double>::quiet_NaN());
  for (int v = 0; v < m.vertex_count(); ++v) {
    if (m.on_boundary[v]) continue;
    if (areas[v] <= 1e-300) {
      absA[v] = 0;
      continue;
    }
    const double K = defect[v] / areas[v];
    absA[v] = std::sqrt(2.0 * std::max(0.0, -K));
  }
  return absA;
}

Eigen::MatrixX3d vertex_normals(const geom::TriMesh& m) {
  Eigen::MatrixX3d normals = Eigen::MatrixX3d::Zero(m.vertex_count(), 3);
  for (int f = 0; f < m.face_count(); ++f) {
    const Vec3 a = m.V.row(m.F(f, 0)), b = m.V.row(m.F(f, 1)), c = m.V.row(m.F(f, 2));
    const Vec3 an = 0.5 * (b - a).cross(c - a);  // area-weighted
    for (int k = 0; k < 3; ++k) normals.row(m.F(f, k)) += an.transpose();
  }
  for (int v = 0; v < m.vertex_count(); ++v) {
    const double n = normals.row(v).norm();
    if (n > 1e-300) normals.row(v) /= n;
  }
  return normals;
}

Eigen::VectorXd tangent_slope(const geom::TriMesh& m) {
  const Eigen::MatrixX3d nu = vertex_normals(m);
  Eigen::VectorXd slope(m.vertex_count());
  for (int v = 0; v < m.vertex_count(); ++v) {
    const double h = std::hypot(nu(v, 0), nu(v, 1));
    const double z = std::abs(nu(v, 2));
    slope[v] = (z < 1e-14) ? kInf : h / z;
  }
  return slope;
}

namespace {

// Boundary polyline edges, from edge incidence.
std::vector<std::pair<int, int>> boundary_edges(const geom::TriMesh& m) {
  std::map<std::pair<int, int>, int> count;
  for (int f = 0; f < m.face_count(); ++f)
    for (int k = 0; k < 3; ++k) {
      const int u = m.F(f, k), v = m.F(f, (k + 1) % 3);
      count[{std::min(u, v), std::max(u, v)}]++;
    }
  std::vector<std::pair<int, int>> out;
  for (const auto& [key, c] : count)
    if (c == 1) out.push_back(key);
  return out;
}

double edge_slope(const geom::TriMesh& m, int u, int v) {
  const Vec3 d = m.V.row(u) - m.V.row(v);
  const double h = std::hypot(d.x(), d.y());
  const double dz = std::abs(d.z());
  if (h < 1e-14) return kInf;
  return dz / h;
}

}  // namespace

double measured_boundary_slope_min(const geom::TriMesh& m) {
  const double a = m.V.col(2).minCoeff(), b = m.V.col(2).maxCoeff();
  double eps = kInf;
  for (const auto& [u, v] : boundary_edges(m)) {
    const double zu = m.V(u, 2), zv = m.V(v, 2);
    if (zu > a && zu < b && zv > a && zv < b) eps = std::min(eps, edge_slope(m, u, v));
  }
  return eps;
}

RadoResult rado_slope_check(const geom::TriMesh& m, double eps, double delta, double R) {
  RadoResult res;
  res.epsilon = eps;
  if (delta <= 0 || R <= 0) {
    res.hypothesis_detail = "delta and R must be positive";
    return res;
  }
  res.bound = std::min(eps, delta / (2.0 * R));
  res.tolerance = 0.1 * res.bound;
  const double a = m.V.col(2).minCoeff(), b = m.V.col(2).maxCoeff();

  // Hypothesis: the boundary in the open slab has exactly two components,
  // each with edge slopes >= eps.
  std::vector<std::pair<int, int>> slab_edges;
  for (const auto& [u, v] : boundary_edges(m)) {
    const double zu = m.V(u, 2), zv = m.V(v, 2);
    if (zu > a && zu < b && zv > a && zv < b) slab_edges.push_back({u, v});
  }
  if (slab_edges.empty()) {
    res.hypothesis_detail = "no boundary edges inside the open slab";
    return res;
  }
  for (const auto& [u, v] : slab_edges)
    if (edge_slope(m, u, v) < eps) {
      res.hypothesis_detail = "boundary edge slope below epsilon";
      return res;
    }
  {
    // Component count via union-find over slab edge endpoints.
    std::map<int, int> parent;
    std::function<int(int)> find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& [u, v] : slab_edges) {
      parent.try_emplace(u, u);
      parent.try_emplace(v, v);
      parent[find(u)] = find(v);
    }
    std::vector<int> roots;
    for (auto& [v, p] : parent) {
      const int r = find(v);
      if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
    }
    if (roots.size() != 2) {
      res.hypothesis_detail =
          "boundary in the open slab has " + std::to_string(roots.size()) + " components, need 2";
      return res;
    }
  }
  res.hypothesis_met = true;

  const Eigen::VectorXd slope = tangent_slope(m);
  res.min_interior_slope = kInf;
  for (int v = 0; v < m.vertex_count(); ++v) {
    if (m.on_boundary[v]) continue;
    const double z = m.V(v, 2);
    if (z > a + delta && z < b - delta) res.min_interior_slope = std::min(res.min_interior_slope, slope[v]);
  }
  // Empty slab: vacuous pass.
  res.pass = (res.min_interior_slope == kInf) || (res.min_interior_slope >= res.bound - res.tolerance);
  return res;
}

int level_set_arcs(const geom::TriMesh& m, double t) {
  const double zmin = m.V.col(2).minCoeff(), zmax = m.V.col(2).maxCoeff();
  const double nudge = 1e-12 * std::max(1.0, zmax - zmin);
  for (int attempt = 0; attempt < 8; ++attempt) {
    bool coincident = false;
    for (int v = 0; v < m.vertex_count() && !coincident; ++v)
      if (std::abs(m.V(v, 2) - t) <= nudge) coincident = true;
    if (!coincident) break;
    // A whole face at this height cannot be nudged away.
    for (int f = 0; f < m.face_count(); ++f) {
      int at = 0;
      for (int k = 0; k < 3; ++k)
        if (std::abs(m.V(m.F(f, k), 2) - t) <= nudge) at++;
      if (at == 3) throw DegenerateSection("level_set_arcs: plane contains a face");
    }
    t += nudge;
  }

  // Union-find over crossed faces, joined through shared crossed edges.
  std::vector<int> crossed(m.face_count(), 0);
  std::map<std::pair<int, int>, std::vector<int>> edge_faces;
  for (int f = 0; f < m.face_count(); ++f) {
    int below = 0, above = 0;
    for (int k = 0; k < 3; ++k) {
      (m.V(m.F(f, k), 2) < t) ? ++below : ++above;
    }
    if (below == 0 || above == 0) continue;
    crossed[f] = 1;
    for (int k = 0; k < 3; ++k) {
      const int u = m.F(f, k), v = m.F(f, (k + 1) % 3);
      if ((m.V(u, 2) < t) != (m.V(v, 2) < t))
        edge_faces[{std::min(u, v), std::max(u, v)}].push_back(f);
    }
  }
  std::vector<int> parent(m.face_count());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [key, fs] : edge_faces)
    for (std::size_t i = 1; i < fs.size(); ++i) parent[find(fs[i])] = find(fs[0]);
  std::vector<int> roots;
  for (int f = 0; f < m.face_count(); ++f)
    if (crossed[f]) {
      const int r = find(f);
      if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
    }
  return static_cast<int>(roots.size());
}

MonotonicityResult theta_monotonicity(const geom::TriMesh& m) {
  if (!m.has_grid())
    throw std::invalid_argument("theta_monotonicity: mesh has no chart grid");
  MonotonicityResult res;
  res.min_dz = kInf;
  res.pass = true;
  for (int i = 1; i < m.grid_rows; ++i) {  // row 0 is the axis (r = 0)
    for (int j = 0; j + 1 < m.grid_cols; ++j) {
      const double dz = m.V(m.grid_vertex(i, j + 1), 2) - m.V(m.grid_vertex(i, j), 2);
      if (dz < res.min_dz) {
        res.min_dz = dz;
        res.worst_row = i;
        res.worst_col = j;
      }
    }
  }
  res.pass = res.min_dz > 0;
  return res;
}

double foliation_disjointness(const geom::TriMesh& m, int count, double r_min) {
  if (count < 2) return kInf;
  const auto region = [r_min](const Vec3& p) { return std::hypot(p.x(), p.y()) >= r_min; };
  double best = kInf;
  // Rotations are isometries, so d(R_j m, R_k m) = d(m, R_{k-j} m); the
  // region r >= r_min is rotation invariant.
  for (int o = 1; o < count; ++o) {
    const auto rot = geom::Isometry::rotate_about_z(2.0 * kPi * o / count);
    const geom::TriMesh copy = geom::apply_isometry(rot, m);
    best = std::min(best, geom::mesh_distance(m, copy, region));
  }
  return best;
}

JacobiResult jacobi_positivity(const geom::TriMesh& m) {
  JacobiResult res;
  const Eigen::MatrixX3d normals = vertex_normals(m);
  res.u = Eigen::VectorXd::Zero(m.vertex_count());
  res.tol = 1e-6 * m.bbox_diagonal();
  res.min_u = kInf;
  bool any = false;
  for (int v = 0; v < m.vertex_count(); ++v) {
    Vec3 nu = normals.row(v);
    if (nu.z() > 0) nu = -nu;  // downward multigraph convention
    const double x = m.V(v, 0), y = m.V(v, 1);
    res.u[v] = nu.dot(Vec3(-y, x, 0));
    if (m.on_boundary[v]) continue;
    if (std::hypot(x, y) < 1e-12) continue;  // axis vertices: u is identically 0
    res.min_u = std::min(res.min_u, res.u[v]);
    any = true;
  }
  if (!any) res.min_u = 0;
  res.pass = res.min_u >= -res.tol;
  return res;
}

namespace {

// Piecewise-linear chart interpolation: locate the triangle containing
// (r, theta) in chart coordinates and interpolate z barycentrically.
struct ChartSampler {
  const geom::TriMesh& m;

  double operator()(double r, double theta) const {
    for (int f = 0; f < m.face_count(); ++f) {
      const int i0 = m.F(f, 0), i1 = m.F(f, 1), i2 = m.F(f, 2);
      const double x0 = m.chart_r[i0], y0 = m.chart_theta[i0];
      const double x1 = m.chart_r[i1], y1 = m.chart_theta[i1];
      const double x2 = m.chart_r[i2], y2 = m.chart_theta[i2];
      const double det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
      if (std::abs(det) < 1e-300) continue;
      const double l1 = ((r - x0) * (y2 - y0) - (theta - y0) * (x2 - x0)) / det;
      const double l2 = ((theta - y0) * (x1 - x0) - (r - x0) * (y1 - y0)) / det;
      const double l0 = 1.0 - l1 - l2;
      const double eps = -1e-9;
      if (l0 >= eps && l1 >= eps && l2 >= eps)
        return l0 * m.V(i0, 2) + l1 * m.V(i1, 2) + l2 * m.V(i2, 2);
    }
    throw std::invalid_argument("mse_residual_patch: chart not single-valued over the patch point");
  }
};

}  // namespace

double mse_residual_patch(const geom::TriMesh& m, const Patch& patch) {
  if (patch.r0 < 0.2) throw std::invalid_argument("mse_residual_patch: r0 must be >= 0.2");
  if (!(patch.r1 > patch.r0) || !(patch.theta1 > patch.theta0))
    throw std::invalid_argument("mse_residual_patch: empty patch");
  if (patch.nr < 3 || patch.ntheta < 3)
    throw std::invalid_argument("mse_residual_patch: need at least a 3x3 patch grid");

  const ChartSampler sample{m};
  const int nr = patch.nr, nt = patch.ntheta;
  const double dr = (patch.r1 - patch.r0) / nr;
  const double dt = (patch.theta1 - patch.theta0) / nt;
  Eigen::MatrixXd fgrid(nr + 1, nt + 1);
  for (int i = 0; i <= nr; ++i)
    for (int j = 0; j <= nt; ++j)
      fgrid(i, j) = sample(patch.r0 + i * dr, patch.theta0 + j * dt);

  // Conservative stencil for (1/r) d_r(r f_r / W) + (1/r) d_theta(f_theta/(r W)).
  auto flux_r = [&](int i, int j) {  // at (i+1/2, j)
    const double r = patch.r0 + (i + 0.5) * dr;
    const double fr = (fgrid(i + 1, j) - fgrid(i, j)) / dr;
    double ft;
    if (j == 0)
      ft = ((fgrid(i + 1, 1) + fgrid(i, 1)) - (fgrid(i + 1, 0) + fgrid(i, 0))) / (2.0 * dt);
    else if (j == nt)
      ft = ((fgrid(i + 1, nt) + fgrid(i, nt)) - (fgrid(i + 1, nt - 1) + fgrid(i, nt - 1))) /
           (2.0 * dt);
    else
      ft = (fgrid(i + 1, j + 1) + fgrid(i, j + 1) - fgrid(i + 1, j - 1) - fgrid(i, j - 1)) /
           (4.0 * dt);
    const double W = std::sqrt(1.0 + fr * fr + (ft / r) * (ft / r));
    return r * fr / W;
  };
  auto flux_t = [&](int i, int j) {  // at (i, j+1/2)
    const double r = patch.r0 + i * dr;
    const double ft = (fgrid(i, j + 1) - fgrid(i, j)) / dt;
    const double fr =
        (fgrid(i + 1, j + 1) + fgrid(i + 1, j) - fgrid(i - 1, j + 1) - fgrid(i - 1, j)) /
        (4.0 * dr);
    const double W = std::sqrt(1.0 + fr * fr + (ft / r) * (ft / r));
    return ft / (r * W);
  };

  double max_res = 0;
  for (int i = 1; i < nr; ++i) {
    const double r = patch.r0 + i * dr;
    for (int j = 1; j < nt; ++j) {
      const double div =
          (flux_r(i, j) - flux_r(i - 1, j)) / dr + (flux_t(i, j) - flux_t(i, j - 1)) / dt;
      max_res = std::max(max_res, std::abs(div / r));
    }
  }
  return max_res * m.bbox_diagonal();
}

std::optional<double> max_curvature_near_axis_point(const geom::TriMesh& m, double z,
                                                    double radius) {
  const Eigen::VectorXd absA = vertex_curvature(m);
  const Vec3 p(0, 0, z);
  double best = -kInf;
  bool any = false;
  for (int v = 0; v < m.vertex_count(); ++v) {
    if (m.on_boundary[v]) continue;
    if ((Vec3(m.V.row(v)) - p).norm() > radius) continue;
    best = std::max(best, absA[v]);
    any = true;
  }
  if (!any) return std::nullopt;
  return best;
}

std::optional<double> curvature_at_nearest_vertex(const geom::TriMesh& m, double z) {
  const Eigen::VectorXd absA = vertex_curvature(m);
  const Vec3 p(0, 0, z);
  int best = -1;
  double best_d = kInf;
  for (int v = 0; v < m.vertex_count(); ++v) {
    if (m.on_boundary[v]) continue;
    const double d = (Vec3(m.V.row(v)) - p).norm();
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  if (best < 0) return std::nullopt;
  return absA[best];
}

std::vector<BlowupRow> blowup_series(const std::vector<std::pair<int, const geom::TriMesh*>>& solves,
                                     const kset::ClosedSetSpec& K, double rho) {
  if (solves.size() < 2) throw std::invalid_argument("blowup_series: need >= 2 values of n");
  const auto samples = kset::sample_points(K);
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (rho >= 0.5 * (samples[i] - samples[i - 1]) && samples[i] > samples[i - 1])
      throw std::invalid_argument("blowup_series: rho must be below half the minimum K-sample gap");

  std::vector<BlowupRow> rows;
  for (const auto& [n, mesh] : solves) {
    const Eigen::VectorXd absA = vertex_curvature(*mesh);
    const double zmin = mesh->V.col(2).minCoeff(), zmax = mesh->V.col(2).maxCoeff();

    double far = -kInf;
    bool far_any = false;
    for (int v = 0; v < mesh->vertex_count(); ++v) {
      if (mesh->on_boundary[v]) continue;
      const double r = std::hypot(mesh->V(v, 0), mesh->V(v, 1));
      if (r > 0.9) continue;
      const double z = mesh->V(v, 2);
      if (z < zmin + rho || z > zmax - rho) continue;
      double dist3 = kInf;
      for (const auto& iv : K.members()) {
        double dz = 0;
        if (z < iv.lo)
          dz = iv.lo - z;
        else if (z > iv.hi)
          dz = z - iv.hi;
        dist3 = std::min(dist3, std::hypot(r, dz));
      }
      if (dist3 < 3.0 * rho) continue;
      far = std::max(far, absA[v]);
      far_any = true;
    }

    if (samples.empty()) {
      BlowupRow row;
      row.n = n;
      row.p = std::numeric_limits<double>::quiet_NaN();
      row.kappa_near = std::numeric_limits<double>::quiet_NaN();
      row.near_empty = true;
      row.kappa_far = far_any ? far : 0;
      row.far_empty = !far_any;
      rows.push_back(row);
      continue;
    }
    for (double p : samples) {
      BlowupRow row;
      row.n = n;
      row.p = p;
      double near = -kInf;
      bool near_any = false;
      const Vec3 pp(0, 0, p);
      for (int v = 0; v < mesh->vertex_count(); ++v) {
        if (mesh->on_boundary[v]) continue;
        if ((Vec3(mesh->V.row(v)) - pp).norm() > rho) continue;
        near = std::max(near, absA[v]);
        near_any = true;
      }
      row.kappa_near = near_any ? near : std::numeric_limits<double>::quiet_NaN();
      row.near_empty = !near_any;
      row.kappa_far = far_any ? far : std::numeric_limits<double>::quiet_NaN();
      row.far_empty = !far_any;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_vertices_csv(const geom::TriMesh& m, const AnalysisReport& rep,
                        const std::string& path) {
  io::CsvWriter csv({"vertex_id", "r", "theta", "z", "absA", "slope", "u"});
  for (int v = 0; v < m.vertex_count(); ++v) {
    const std::string absA = std::isnan(rep.absA[v]) ? "" : io::fmt(rep.absA[v]);
    csv.row({std::to_string(v), io::fmt(m.chart_r[v]), io::fmt(m.chart_theta[v]),
             io::fmt(m.V(v, 2)), absA, io::fmt(rep.slope[v]), io::fmt(rep.u[v])});
  }
  csv.save(path);
}

void write_blowup_csv(const std::vector<BlowupRow>& rows, const std::string& path) {
  io::CsvWriter csv({"n", "p", "kappa_near", "kappa_far"});
  for (const auto& row : rows) {
    csv.row({std::to_string(row.n), std::isnan(row.p) ? "" : io::fmt(row.p),
             row.near_empty ? "" : io::fmt(row.kappa_near),
             row.far_empty ? "" : io::fmt(row.kappa_far)});
  }
  csv.save(path);
}

}  // namespace lamlab::analysis
