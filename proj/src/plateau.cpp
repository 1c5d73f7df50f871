#include "lamlab/plateau.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>

#include "lamlab/io.hpp"

namespace lamlab::plateau {

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max-iters";
    case SolveStatus::Degenerate: return "degenerate";
  }
  return "max-iters";
}

geom::TriMesh initial_mesh(const boundary::BoundaryLoop& loop, int n_r) {
  if (n_r < 4) throw std::invalid_argument("initial_mesh: N_r must be >= 4");
  if (loop.n_radial != n_r)
    throw std::invalid_argument("initial_mesh: loop radial subdivision differs from N_r");
  const int m = static_cast<int>(loop.z_helix.size());
  if (m < 2) throw std::invalid_argument("initial_mesh: loop has too few helix samples");

  geom::TriMesh mesh;
  mesh.grid_rows = n_r + 1;
  mesh.grid_cols = m;
  mesh.V.resize(static_cast<long>(n_r + 1) * m, 3);
  for (int i = 0; i <= n_r; ++i) {
    const double r = static_cast<double>(i) / n_r;
    for (int j = 0; j < m; ++j) {
      const double th = loop.theta_helix[j];
      mesh.V.row(mesh.grid_vertex(i, j)) =
          Vec3(r * std::cos(th), r * std::sin(th), loop.z_helix[j]);
    }
  }
  mesh.F.resize(2L * n_r * (m - 1), 3);
  long f = 0;
  for (int i = 0; i < n_r; ++i) {
    for (int j = 0; j + 1 < m; ++j) {
      const int v00 = mesh.grid_vertex(i, j), v01 = mesh.grid_vertex(i, j + 1);
      const int v10 = mesh.grid_vertex(i + 1, j), v11 = mesh.grid_vertex(i + 1, j + 1);
      // Winding chosen so face normals of a multigraph point downward,
      // matching the (grad z, -1)/W orientation the analysis passes assume.
      mesh.F.row(f++) = Eigen::Vector3i(v00, v11, v10);
      mesh.F.row(f++) = Eigen::Vector3i(v00, v01, v11);
    }
  }

  mesh.init_attributes();
  for (int i = 0; i <= n_r; ++i) {
    const double r = static_cast<double>(i) / n_r;
    for (int j = 0; j < m; ++j) {
      const int v = mesh.grid_vertex(i, j);
      mesh.chart_r[v] = r;
      mesh.chart_theta[v] = loop.theta_helix[j];
      if (i == 0) {
        mesh.role[v] = geom::VertexRole::Axis;
        mesh.on_boundary[v] = 1;
      } else if (i == n_r) {
        mesh.role[v] = geom::VertexRole::Helix;
        mesh.on_boundary[v] = 1;
      } else if (j == 0 || j == m - 1) {
        mesh.role[v] = geom::VertexRole::Radial;
        mesh.on_boundary[v] = 1;
      }
    }
  }
  return mesh;
}

double area(const geom::TriMesh& m) {
  double total = 0;
  for (int f = 0; f < m.face_count(); ++f)
    total += geom::triangle_area(m.V.row(m.F(f, 0)), m.V.row(m.F(f, 1)), m.V.row(m.F(f, 2)));
  return total;
}

double min_triangle_area(const geom::TriMesh& m) {
  double best = std::numeric_limits<double>::infinity();
  for (int f = 0; f < m.face_count(); ++f)
    best = std::min(best, geom::triangle_area(m.V.row(m.F(f, 0)), m.V.row(m.F(f, 1)),
                                              m.V.row(m.F(f, 2))));
  return best;
}

namespace {

// Frozen connectivity of one solve: edge list plus the edge opposite each
// face corner, so weights can be refreshed into a flat array every iteration.
struct Connectivity {
  std::vector<std::pair<int, int>> edges;       // u < v
  std::vector<std::array<int, 3>> face_edge;    // edge opposite corner k
  std::vector<int> interior;                    // interior vertex ids
  std::vector<int> interior_index;              // vertex -> row in the system, -1 if pinned
};

Connectivity build_connectivity(const geom::TriMesh& m) {
  Connectivity c;
  std::map<std::pair<int, int>, int> ids;
  c.face_edge.resize(m.face_count());
  for (int f = 0; f < m.face_count(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const int u = m.F(f, (k + 1) % 3), v = m.F(f, (k + 2) % 3);
      const std::pair<int, int> key{std::min(u, v), std::max(u, v)};
      auto [it, inserted] = ids.try_emplace(key, static_cast<int>(c.edges.size()));
      if (inserted) c.edges.push_back(key);
      c.face_edge[f][k] = it->second;
    }
  }
  c.interior_index.assign(m.vertex_count(), -1);
  for (int v = 0; v < m.vertex_count(); ++v)
    if (!m.on_boundary[v]) {
      c.interior_index[v] = static_cast<int>(c.interior.size());
      c.interior.push_back(v);
    }
  return c;
}

// Clamped cotangent edge weights; magnitudes above w_max are capped.
bool compute_weights(const geom::TriMesh& m, const Connectivity& c, double w_max,
                     std::vector<double>& w) {
  w.assign(c.edges.size(), 0.0);
  for (int f = 0; f < m.face_count(); ++f) {
    const Vec3 p0 = m.V.row(m.F(f, 0)), p1 = m.V.row(m.F(f, 1)), p2 = m.V.row(m.F(f, 2));
    const double a2 = 2.0 * geom::triangle_area(p0, p1, p2);
    const Vec3 pts[3] = {p0, p1, p2};
    for (int k = 0; k < 3; ++k) {
      const Vec3 e1 = pts[(k + 1) % 3] - pts[k];
      const Vec3 e2 = pts[(k + 2) % 3] - pts[k];
      const double cot = (a2 > 1e-300) ? e1.dot(e2) / a2 : 0.0;
      w[c.face_edge[f][k]] += 0.5 * cot;
    }
  }
  bool clamped = false;
  for (double& wt : w)
    if (std::abs(wt) > w_max) {
      wt = std::copysign(w_max, wt);
      clamped = true;
    }
  return clamped;
}

// Area-weighted unit vertex normals (the analysis module exposes the same
// construction; duplicated here to keep plateau self-contained).
Eigen::MatrixX3d unit_vertex_normals(const geom::TriMesh& m) {
  Eigen::MatrixX3d normals = Eigen::MatrixX3d::Zero(m.vertex_count(), 3);
  for (int f = 0; f < m.face_count(); ++f) {
    const Vec3 a = m.V.row(m.F(f, 0)), b = m.V.row(m.F(f, 1)), c = m.V.row(m.F(f, 2));
    const Vec3 an = 0.5 * (b - a).cross(c - a);
    for (int k = 0; k < 3; ++k) normals.row(m.F(f, k)) += an.transpose();
  }
  for (int v = 0; v < m.vertex_count(); ++v) {
    const double n = normals.row(v).norm();
    if (n > 1e-300) normals.row(v) /= n;
  }
  return normals;
}

// Normal displacement field solving the cotangent-Laplace system restricted
// to the normal bundle: minimize the Dirichlet energy of x + phi * n over
// per-vertex scalars phi (boundary pinned at phi = 0).  The restriction keeps
// the grid chart intact; the unrestricted per-coordinate solve lets vertices
// slide tangentially and collapse corner slivers (frozen connectivity has a
// degenerate area infimum there).  Fixed point: (L x) . n = 0 at every
// interior vertex.  Returns false if the iterative solve misses tolerance.
bool normal_harmonic_field(const geom::TriMesh& m, const Connectivity& c,
                           const std::vector<double>& w, const Eigen::MatrixX3d& normals,
                           const SolverParams& params, Eigen::VectorXd* out) {
  const int ni = static_cast<int>(c.interior.size());
  if (ni == 0) {
    out->resize(0);
    return true;
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(c.edges.size() * 2 + ni);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ni);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(ni);
  for (std::size_t e = 0; e < c.edges.size(); ++e) {
    const auto [u, v] = c.edges[e];
    const double wt = w[e];
    const int iu = c.interior_index[u], iv = c.interior_index[v];
    const Vec3 duv = (m.V.row(u) - m.V.row(v)).transpose();
    if (iu >= 0) {
      diag[iu] += wt;
      rhs[iu] -= wt * duv.dot(normals.row(u));
    }
    if (iv >= 0) {
      diag[iv] += wt;
      rhs[iv] += wt * duv.dot(normals.row(v));
    }
    if (iu >= 0 && iv >= 0) {
      const double off = -wt * normals.row(u).dot(normals.row(v));
      trips.emplace_back(iu, iv, off);
      trips.emplace_back(iv, iu, off);
    }
  }
  for (int i = 0; i < ni; ++i) trips.emplace_back(i, i, diag[i]);

  Eigen::SparseMatrix<double> A(ni, ni);
  A.setFromTriplets(trips.begin(), trips.end());

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(params.linear_tol);
  cg.setMaxIterations(static_cast<Eigen::Index>(params.linear_iters_per_vertex) *
                      m.vertex_count());
  cg.compute(A);
  if (cg.info() != Eigen::Success) return false;
  if (rhs.norm() < 1e-300) {
    *out = Eigen::VectorXd::Zero(ni);
    return true;
  }
  *out = cg.solve(rhs);
  return cg.info() == Eigen::Success;
}

// One weight computation + solve; falls back to a positive-floor assembly
// when the clamped system cannot be solved.
void solve_step(const geom::TriMesh& m, const Connectivity& c, const SolverParams& params,
                const Eigen::MatrixX3d& normals, Eigen::VectorXd* phi, bool* clamped_out) {
  std::vector<double> w;
  bool clamped = compute_weights(m, c, params.w_max, w);
  if (!normal_harmonic_field(m, c, w, normals, params, phi)) {
    for (double& wt : w) wt = std::max(wt, params.w_min);
    clamped = true;
    if (!normal_harmonic_field(m, c, w, normals, params, phi))
      throw SolverError("plateau: linear solve failed to reach tolerance");
  }
  if (clamped_out) *clamped_out = clamped;
}

void continue_chart(geom::TriMesh& m) {
  for (int v = 0; v < m.vertex_count(); ++v) {
    if (m.on_boundary[v]) continue;  // pinned vertices keep their labels
    const double x = m.V(v, 0), y = m.V(v, 1);
    const double r = std::hypot(x, y);
    m.chart_r[v] = r;
    if (r < 1e-14) continue;
    const double raw = std::atan2(y, x);
    const double prev = m.chart_theta[v];
    constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
    m.chart_theta[v] = raw + kTwoPi * std::round((prev - raw) / kTwoPi);
  }
}

}  // namespace

geom::TriMesh dirichlet_step(const geom::TriMesh& m, const SolverParams& params, bool* clamped) {
  const Connectivity c = build_connectivity(m);
  const Eigen::MatrixX3d normals = unit_vertex_normals(m);
  Eigen::VectorXd phi;
  solve_step(m, c, params, normals, &phi, clamped);
  geom::TriMesh out = m;
  for (std::size_t i = 0; i < c.interior.size(); ++i) {
    const int v = c.interior[i];
    out.V.row(v) += params.damping * phi[i] * normals.row(v);
  }
  continue_chart(out);
  return out;
}

std::pair<geom::TriMesh, SolveRecord> solve_plateau(const boundary::BoundaryLoop& loop, int n_r,
                                                    const SolverParams& params) {
  geom::TriMesh mesh = initial_mesh(loop, n_r);
  const Connectivity c = build_connectivity(mesh);
  SolveRecord rec;
  const double tol = params.tol_disp_rel * mesh.bbox_diagonal();

  rec.status = SolveStatus::MaxIterations;
  Eigen::MatrixXd candidate = mesh.V;
  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    const Eigen::MatrixX3d normals = unit_vertex_normals(mesh);
    Eigen::VectorXd phi;
    bool clamped = false;
    solve_step(mesh, c, params, normals, &phi, &clamped);

    // Accept the damped update, halving the damping (at most twice) if it
    // would push a triangle below the area floor.
    double damping = params.damping;
    bool accepted = false;
    geom::TriMesh probe = mesh;
    for (int attempt = 0; attempt <= 2; ++attempt) {
      candidate = mesh.V;
      for (std::size_t i = 0; i < c.interior.size(); ++i) {
        const int v = c.interior[i];
        candidate.row(v) += damping * phi[i] * normals.row(v);
      }
      probe.V = candidate;
      if (min_triangle_area(probe) > params.area_floor_rel * area(probe)) {
        accepted = true;
        break;
      }
      damping *= 0.5;
    }
    if (!accepted) {
      rec.status = SolveStatus::Degenerate;
      break;
    }

    double max_disp = 0;
    for (int v : c.interior)
      max_disp = std::max(max_disp, (candidate.row(v) - mesh.V.row(v)).norm());
    mesh.V = candidate;
    continue_chart(mesh);

    IterationStats st;
    st.iter = iter;
    st.area = area(mesh);
    st.max_disp = max_disp;
    st.residual = mean_curvature_residual(mesh);
    st.clamped = clamped;
    rec.iterations.push_back(st);

    if (max_disp < tol) {
      rec.status = SolveStatus::Converged;
      break;
    }
  }
  rec.final_residual =
      rec.iterations.empty() ? mean_curvature_residual(mesh) : rec.iterations.back().residual;
  return {std::move(mesh), std::move(rec)};
}

Eigen::VectorXd mixed_voronoi_areas(const geom::TriMesh& m) {
  Eigen::VectorXd areas = Eigen::VectorXd::Zero(m.vertex_count());
  for (int f = 0; f < m.face_count(); ++f) {
    const int idx[3] = {m.F(f, 0), m.F(f, 1), m.F(f, 2)};
    const Vec3 p[3] = {m.V.row(idx[0]), m.V.row(idx[1]), m.V.row(idx[2])};
    const double A = geom::triangle_area(p[0], p[1], p[2]);
    if (A <= 1e-300) continue;

    double cot[3];
    bool obtuse = false;
    int obtuse_at = -1;
    for (int k = 0; k < 3; ++k) {
      const Vec3 e1 = p[(k + 1) % 3] - p[k];
      const Vec3 e2 = p[(k + 2) % 3] - p[k];
      cot[k] = e1.dot(e2) / (2.0 * A);
      if (e1.dot(e2) < 0) {
        obtuse = true;
        obtuse_at = k;
      }
    }
    if (!obtuse) {
      // Voronoi region: wing contributions of the two incident edges.
      for (int k = 0; k < 3; ++k) {
        const double l1 = (p[(k + 1) % 3] - p[k]).squaredNorm();
        const double l2 = (p[(k + 2) % 3] - p[k]).squaredNorm();
        areas[idx[k]] += (l1 * cot[(k + 2) % 3] + l2 * cot[(k + 1) % 3]) / 8.0;
      }
    } else {
      for (int k = 0; k < 3; ++k) areas[idx[k]] += (k == obtuse_at) ? A / 2.0 : A / 4.0;
    }
  }
  return areas;
}

Eigen::VectorXd residual_per_vertex(const geom::TriMesh& m) {
  const int nv = m.vertex_count();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(nv, 3);
  for (int f = 0; f < m.face_count(); ++f) {
    const Vec3 p0 = m.V.row(m.F(f, 0)), p1 = m.V.row(m.F(f, 1)), p2 = m.V.row(m.F(f, 2));
    const double a2 = 2.0 * geom::triangle_area(p0, p1, p2);
    if (a2 <= 1e-300) continue;
    const Vec3 pts[3] = {p0, p1, p2};
    const int idx[3] = {m.F(f, 0), m.F(f, 1), m.F(f, 2)};
    for (int k = 0; k < 3; ++k) {
      const Vec3 e1 = pts[(k + 1) % 3] - pts[k];
      const Vec3 e2 = pts[(k + 2) % 3] - pts[k];
      const double half_cot = 0.5 * e1.dot(e2) / a2;
      const int u = idx[(k + 1) % 3], v = idx[(k + 2) % 3];
      const Vec3 duv = pts[(k + 1) % 3] - pts[(k + 2) % 3];
      lap.row(u) += half_cot * duv;
      lap.row(v) -= half_cot * duv;
    }
  }
  // Normal projection: the normal part of the Laplacian is the discrete mean
  // curvature vector; the tangential part is parametrization imbalance.
  const Eigen::MatrixX3d normals = unit_vertex_normals(m);
  const Eigen::VectorXd areas = mixed_voronoi_areas(m);
  const double diag = m.bbox_diagonal();
  Eigen::VectorXd res = Eigen::VectorXd::Zero(nv);
  for (int v = 0; v < nv; ++v) {
    if (m.on_boundary[v]) continue;
    if (areas[v] <= 1e-300) continue;
    res[v] = std::abs(lap.row(v).dot(normals.row(v))) / (2.0 * areas[v]) * diag;
  }
  return res;
}

double mean_curvature_residual(const geom::TriMesh& m) {
  const Eigen::VectorXd r = residual_per_vertex(m);
  return r.size() ? r.maxCoeff() : 0.0;
}

void write_solve_csv(const SolveRecord& rec, const std::string& path) {
  io::CsvWriter csv({"iter", "area", "max_disp", "residual", "clamped_flag"});
  for (const auto& st : rec.iterations)
    csv.row({std::to_string(st.iter), io::fmt(st.area), io::fmt(st.max_disp),
             io::fmt(st.residual), st.clamped ? "1" : "0"});
  csv.save(path);
}

}  // namespace lamlab::plateau
