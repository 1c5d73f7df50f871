#include "lamlab/geom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "lamlab/io.hpp"

namespace lamlab::geom {

const char* role_name(VertexRole r) {
  switch (r) {
    case VertexRole::Interior: return "interior";
    case VertexRole::Helix: return "helix";
    case VertexRole::Axis: return "axis";
    case VertexRole::Radial: return "radial";
  }
  return "interior";
}

VertexRole role_from_name(const std::string& name) {
  if (name == "helix") return VertexRole::Helix;
  if (name == "axis") return VertexRole::Axis;
  if (name == "radial") return VertexRole::Radial;
  return VertexRole::Interior;
}

void TriMesh::init_attributes() {
  const int n = vertex_count();
  role.assign(n, VertexRole::Interior);
  on_boundary.assign(n, 0);
  chart_r = Eigen::VectorXd::Zero(n);
  chart_theta = Eigen::VectorXd::Zero(n);
}

double TriMesh::bbox_diagonal() const {
  if (V.rows() == 0) return 0.0;
  Vec3 lo = V.colwise().minCoeff();
  Vec3 hi = V.colwise().maxCoeff();
  return (hi - lo).norm();
}

Isometry Isometry::identity() {
  return Isometry{Eigen::Matrix3d::Identity(), Vec3::Zero()};
}

Isometry Isometry::rotate_about_z(double angle) {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  const double c = std::cos(angle), s = std::sin(angle);
  R(0, 0) = c;
  R(0, 1) = -s;
  R(1, 0) = s;
  R(1, 1) = c;
  return Isometry{R, Vec3::Zero()};
}

Isometry Isometry::half_turn_about_line(const Vec3& point, const Vec3& dir) {
  if (std::abs(dir.z()) > 1e-12)
    throw std::invalid_argument("half_turn_about_line: direction must be horizontal");
  const Vec3 d = dir.normalized();
  // Rotation by pi about axis d: R = 2 d d^T - I.
  Eigen::Matrix3d R = 2.0 * d * d.transpose() - Eigen::Matrix3d::Identity();
  return Isometry{R, point - R * point};
}

Isometry Isometry::then(const Isometry& next) const {
  return Isometry{next.R * R, next.R * t + next.t};
}

Vec3 apply_isometry(const Isometry& iso, const Vec3& p) { return iso.R * p + iso.t; }

TriMesh apply_isometry(const Isometry& iso, const TriMesh& m) {
  TriMesh out = m;
  for (int v = 0; v < m.vertex_count(); ++v)
    out.V.row(v) = (iso.R * m.V.row(v).transpose() + iso.t).transpose();
  return out;
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

namespace {

struct EdgeKey {
  int a, b;  // a < b
  bool operator<(const EdgeKey& o) const { return a < o.a || (a == o.a && b < o.b); }
  bool operator==(const EdgeKey& o) const { return a == o.a && b == o.b; }
};

struct EdgeInfo {
  int count = 0;          // incident faces
  int forward = 0;        // traversals in (a,b) order
  int face0 = -1;
};

std::map<EdgeKey, EdgeInfo> collect_edges(const TriMesh& m) {
  std::map<EdgeKey, EdgeInfo> edges;
  for (int f = 0; f < m.face_count(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const int u = m.F(f, k), v = m.F(f, (k + 1) % 3);
      EdgeKey key{std::min(u, v), std::max(u, v)};
      EdgeInfo& e = edges[key];
      e.count++;
      if (u == key.a) e.forward++;
      if (e.face0 < 0) e.face0 = f;
    }
  }
  return edges;
}

}  // namespace

void recompute_boundary_flags(TriMesh& m) {
  m.on_boundary.assign(m.vertex_count(), 0);
  auto edges = collect_edges(m);
  for (const auto& [key, info] : edges) {
    if (info.count == 1) {
      m.on_boundary[key.a] = 1;
      m.on_boundary[key.b] = 1;
    }
  }
}

MeshValidation validate_mesh(const TriMesh& m, double area_floor) {
  MeshValidation rep;
  auto fail = [&rep](std::string check, std::string detail) {
    rep.failures.push_back({std::move(check), std::move(detail)});
  };

  const int nv = m.vertex_count();
  if (nv == 0 || m.face_count() == 0) {
    fail("nonempty", "mesh has no vertices or no faces");
    return rep;
  }
  for (int f = 0; f < m.face_count(); ++f) {
    for (int k = 0; k < 3; ++k) {
      int v = m.F(f, k);
      if (v < 0 || v >= nv) {
        fail("indices", "face " + std::to_string(f) + " references vertex " + std::to_string(v));
        return rep;
      }
    }
    if (m.F(f, 0) == m.F(f, 1) || m.F(f, 1) == m.F(f, 2) || m.F(f, 0) == m.F(f, 2))
      fail("indices", "face " + std::to_string(f) + " repeats a vertex");
  }

  auto edges = collect_edges(m);
  int boundary_edges = 0;
  for (const auto& [key, info] : edges) {
    if (info.count > 2) {
      fail("manifold", "edge (" + std::to_string(key.a) + "," + std::to_string(key.b) +
                           ") has " + std::to_string(info.count) + " incident faces");
    } else if (info.count == 2) {
      if (info.forward != 1)
        fail("orientation", "edge (" + std::to_string(key.a) + "," + std::to_string(key.b) +
                                ") traversed twice in the same direction");
    } else {
      boundary_edges++;
    }
  }

  const int ne = static_cast<int>(edges.size());
  rep.euler_characteristic = nv - ne + m.face_count();
  if (rep.euler_characteristic != 1)
    fail("topology", "Euler characteristic " + std::to_string(rep.euler_characteristic) +
                         " (disk requires 1)");

  // Boundary edges must form one closed cycle.
  {
    std::unordered_map<int, std::vector<int>> adj;
    for (const auto& [key, info] : edges) {
      if (info.count == 1) {
        adj[key.a].push_back(key.b);
        adj[key.b].push_back(key.a);
      }
    }
    bool degree_ok = true;
    for (const auto& [v, nb] : adj)
      if (nb.size() != 2) {
        fail("boundary", "boundary vertex " + std::to_string(v) + " has degree " +
                             std::to_string(nb.size()));
        degree_ok = false;
      }
    int loops = 0;
    if (degree_ok && !adj.empty()) {
      std::unordered_map<int, bool> seen;
      for (const auto& [start, nb] : adj) {
        if (seen[start]) continue;
        loops++;
        int prev = -1, cur = start;
        while (!seen[cur]) {
          seen[cur] = true;
          const auto& vs = adj[cur];
          int nxt = (vs[0] == prev) ? vs[1] : vs[0];
          prev = cur;
          cur = nxt;
        }
      }
    }
    rep.boundary_loops = loops;
    if (loops != 1)
      fail("boundary", "expected 1 boundary loop, found " + std::to_string(loops));

    if (!m.on_boundary.empty()) {
      for (int v = 0; v < nv; ++v) {
        const bool flagged = m.on_boundary[v] != 0;
        const bool incident = adj.count(v) > 0;
        if (flagged != incident) {
          fail("boundary-flags", "vertex " + std::to_string(v) + " flag " +
                                     (flagged ? "set" : "clear") + " but edge incidence says " +
                                     (incident ? "boundary" : "interior"));
          break;
        }
      }
    }
  }

  rep.min_triangle_area = std::numeric_limits<double>::infinity();
  for (int f = 0; f < m.face_count(); ++f) {
    const double a = triangle_area(m.V.row(m.F(f, 0)), m.V.row(m.F(f, 1)), m.V.row(m.F(f, 2)));
    rep.min_triangle_area = std::min(rep.min_triangle_area, a);
  }
  if (rep.min_triangle_area <= area_floor)
    fail("area-floor", "min triangle area " + io::fmt(rep.min_triangle_area) +
                           " at or below floor " + io::fmt(area_floor));

  rep.ok = rep.failures.empty();
  return rep;
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Eberly's region-based closest point on triangle.
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return (p - a).norm();

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return (p - b).norm();

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    const double v = d1 / (d1 - d3);
    return (p - (a + v * ab)).norm();
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return (p - c).norm();

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    const double w = d2 / (d2 - d6);
    return (p - (a + w * ac)).norm();
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + w * (c - b))).norm();
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return (p - (a + v * ab + w * ac)).norm();
}

namespace {

// Uniform grid over triangle AABBs for nearest-triangle queries.
class TriangleGrid {
public:
  TriangleGrid(const TriMesh& m, const std::vector<int>& tris) : mesh_(m), tris_(tris) {
    lo_ = Vec3::Constant(std::numeric_limits<double>::infinity());
    hi_ = -lo_;
    double edge_sum = 0;
    int edge_n = 0;
    for (int f : tris_) {
      for (int k = 0; k < 3; ++k) {
        const Vec3 p = mesh_.V.row(mesh_.F(f, k));
        lo_ = lo_.cwiseMin(p);
        hi_ = hi_.cwiseMax(p);
        const Vec3 q = mesh_.V.row(mesh_.F(f, (k + 1) % 3));
        edge_sum += (p - q).norm();
        edge_n++;
      }
    }
    cell_ = std::max(1e-12, 2.0 * edge_sum / std::max(1, edge_n));
    for (int d = 0; d < 3; ++d)
      dims_[d] = std::max(1, std::min(256, int((hi_[d] - lo_[d]) / cell_) + 1));
    cells_.resize(std::size_t(dims_[0]) * dims_[1] * dims_[2]);
    for (int f : tris_) {
      Vec3 tlo = Vec3::Constant(std::numeric_limits<double>::infinity()), thi = -tlo;
      for (int k = 0; k < 3; ++k) {
        const Vec3 p = mesh_.V.row(mesh_.F(f, k));
        tlo = tlo.cwiseMin(p);
        thi = thi.cwiseMax(p);
      }
      int i0[3], i1[3];
      index_of(tlo, i0);
      index_of(thi, i1);
      for (int i = i0[0]; i <= i1[0]; ++i)
        for (int j = i0[1]; j <= i1[1]; ++j)
          for (int k = i0[2]; k <= i1[2]; ++k) cells_[flat(i, j, k)].push_back(f);
    }
  }

  double nearest(const Vec3& p, double upper_bound) const {
    int ic[3];
    index_of(p, ic);
    double best = upper_bound;
    const int max_ring = std::max({dims_[0], dims_[1], dims_[2]});
    for (int ring = 0; ring <= max_ring; ++ring) {
      // Once a hit exists, stop after the ring that could still beat it.
      if (best < std::numeric_limits<double>::infinity() &&
          (double(ring) - 1.0) * cell_span() > best)
        break;
      bool any_cell = false;
      for (int i = std::max(0, ic[0] - ring); i <= std::min(dims_[0] - 1, ic[0] + ring); ++i)
        for (int j = std::max(0, ic[1] - ring); j <= std::min(dims_[1] - 1, ic[1] + ring); ++j)
          for (int k = std::max(0, ic[2] - ring); k <= std::min(dims_[2] - 1, ic[2] + ring); ++k) {
            if (std::max({std::abs(i - ic[0]), std::abs(j - ic[1]), std::abs(k - ic[2])}) != ring)
              continue;
            any_cell = true;
            for (int f : cells_[flat(i, j, k)]) {
              const double d = point_triangle_distance(
                  p, mesh_.V.row(mesh_.F(f, 0)), mesh_.V.row(mesh_.F(f, 1)),
                  mesh_.V.row(mesh_.F(f, 2)));
              best = std::min(best, d);
            }
          }
      if (!any_cell && ring > 0 && best < std::numeric_limits<double>::infinity()) break;
    }
    return best;
  }

private:
  double cell_span() const { return cell_; }

  void index_of(const Vec3& p, int out[3]) const {
    for (int d = 0; d < 3; ++d) {
      double t = (p[d] - lo_[d]) / (hi_[d] - lo_[d] + 1e-300);
      int i = int(t * dims_[d]);
      out[d] = std::clamp(i, 0, dims_[d] - 1);
    }
  }
  std::size_t flat(int i, int j, int k) const {
    return (std::size_t(i) * dims_[1] + j) * dims_[2] + k;
  }

  const TriMesh& mesh_;
  std::vector<int> tris_;
  Vec3 lo_, hi_;
  double cell_;
  int dims_[3];
  std::vector<std::vector<int>> cells_;
};

double one_sided_distance(const TriMesh& from, const TriMesh& to, const RegionPred& region) {
  std::vector<int> tris;
  for (int f = 0; f < to.face_count(); ++f) {
    bool inside = true;
    for (int k = 0; k < 3; ++k)
      if (!region(to.V.row(to.F(f, k)))) {
        inside = false;
        break;
      }
    if (inside) tris.push_back(f);
  }
  std::vector<int> verts;
  for (int v = 0; v < from.vertex_count(); ++v)
    if (region(from.V.row(v))) verts.push_back(v);
  if (tris.empty() || verts.empty())
    throw NoSamplesInRegion("mesh_distance: no samples in region");

  TriangleGrid grid(to, tris);
  double best = std::numeric_limits<double>::infinity();
  for (int v : verts) best = std::min(best, grid.nearest(from.V.row(v), best));
  return best;
}

}  // namespace

double mesh_distance(const TriMesh& a, const TriMesh& b, const RegionPred& region) {
  const double ab = one_sided_distance(a, b, region);
  const double ba = one_sided_distance(b, a, region);
  return std::min(ab, ba);
}

double mean_edge_length(const TriMesh& m) {
  double sum = 0;
  int n = 0;
  auto edges = collect_edges(m);
  for (const auto& [key, info] : edges) {
    sum += (m.V.row(key.a) - m.V.row(key.b)).norm();
    n++;
  }
  return n ? sum / n : 0.0;
}

namespace {

bool segment_hits_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b,
                           const Vec3& c, double eps) {
  const Vec3 n = (b - a).cross(c - a);
  const double denom = n.dot(q - p);
  if (std::abs(denom) < 1e-300) return false;  // parallel: grazing contact ignored
  const double t = n.dot(a - p) / denom;
  if (t <= eps || t >= 1.0 - eps) return false;
  const Vec3 x = p + t * (q - p);
  // Barycentric inside-test with a margin so shared-edge contact is not a hit.
  const Vec3 v0 = b - a, v1 = c - a, v2 = x - a;
  const double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
  const double d20 = v2.dot(v0), d21 = v2.dot(v1);
  const double det = d00 * d11 - d01 * d01;
  if (det < 1e-300) return false;
  const double v = (d11 * d20 - d01 * d21) / det;
  const double w = (d00 * d21 - d01 * d20) / det;
  return v > eps && w > eps && (1.0 - v - w) > eps;
}

}  // namespace

bool has_self_intersections(const TriMesh& m, const RegionPred& region) {
  std::vector<int> tris;
  for (int f = 0; f < m.face_count(); ++f) {
    bool inside = true;
    for (int k = 0; k < 3; ++k)
      if (!region(m.V.row(m.F(f, k)))) {
        inside = false;
        break;
      }
    if (inside) tris.push_back(f);
  }
  if (tris.empty()) return false;

  // Bin triangle AABBs coarsely, then test candidate pairs edge-vs-face.
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  for (int f : tris)
    for (int k = 0; k < 3; ++k) {
      const Vec3 p = m.V.row(m.F(f, k));
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  const double cell = std::max(1e-9, 3.0 * mean_edge_length(m));
  int dims[3];
  for (int d = 0; d < 3; ++d) dims[d] = std::max(1, std::min(128, int((hi[d] - lo[d]) / cell) + 1));
  auto flat = [&](int i, int j, int k) { return (std::size_t(i) * dims[1] + j) * dims[2] + k; };
  std::vector<std::vector<int>> cells(std::size_t(dims[0]) * dims[1] * dims[2]);
  auto cell_range = [&](int f, int out0[3], int out1[3]) {
    Vec3 tlo = Vec3::Constant(std::numeric_limits<double>::infinity()), thi = -tlo;
    for (int k = 0; k < 3; ++k) {
      const Vec3 p = m.V.row(m.F(f, k));
      tlo = tlo.cwiseMin(p);
      thi = thi.cwiseMax(p);
    }
    for (int d = 0; d < 3; ++d) {
      out0[d] = std::clamp(int((tlo[d] - lo[d]) / cell), 0, dims[d] - 1);
      out1[d] = std::clamp(int((thi[d] - lo[d]) / cell), 0, dims[d] - 1);
    }
  };
  for (int f : tris) {
    int i0[3], i1[3];
    cell_range(f, i0, i1);
    for (int i = i0[0]; i <= i1[0]; ++i)
      for (int j = i0[1]; j <= i1[1]; ++j)
        for (int k = i0[2]; k <= i1[2]; ++k) cells[flat(i, j, k)].push_back(f);
  }

  auto shares_vertex = [&](int f, int g) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (m.F(f, i) == m.F(g, j)) return true;
    return false;
  };
  const double eps = 1e-10;
  for (int f : tris) {
    int i0[3], i1[3];
    cell_range(f, i0, i1);
    for (int i = i0[0]; i <= i1[0]; ++i)
      for (int j = i0[1]; j <= i1[1]; ++j)
        for (int k = i0[2]; k <= i1[2]; ++k)
          for (int g : cells[flat(i, j, k)]) {
            if (g <= f || shares_vertex(f, g)) continue;
            const Vec3 a = m.V.row(m.F(g, 0)), b = m.V.row(m.F(g, 1)), c = m.V.row(m.F(g, 2));
            const Vec3 fa = m.V.row(m.F(f, 0)), fb = m.V.row(m.F(f, 1)), fc = m.V.row(m.F(f, 2));
            for (int e = 0; e < 3; ++e) {
              const Vec3 p = m.V.row(m.F(f, e)), q = m.V.row(m.F(f, (e + 1) % 3));
              if (segment_hits_triangle(p, q, a, b, c, eps)) return true;
              const Vec3 gp = m.V.row(m.F(g, e)), gq = m.V.row(m.F(g, (e + 1) % 3));
              if (segment_hits_triangle(gp, gq, fa, fb, fc, eps)) return true;
            }
          }
  }
  return false;
}

std::string obj_string(const TriMesh& m) {
  std::string out;
  if (m.has_grid())
    out += "# lamlab grid " + std::to_string(m.grid_rows) + " " + std::to_string(m.grid_cols) +
           "\n";
  for (int v = 0; v < m.vertex_count(); ++v)
    out += "v " + io::fmt(m.V(v, 0)) + " " + io::fmt(m.V(v, 1)) + " " + io::fmt(m.V(v, 2)) + "\n";
  for (int f = 0; f < m.face_count(); ++f)
    out += "f " + std::to_string(m.F(f, 0) + 1) + " " + std::to_string(m.F(f, 1) + 1) + " " +
           std::to_string(m.F(f, 2) + 1) + "\n";
  return out;
}

void write_obj(const TriMesh& m, const std::string& path) {
  io::write_text_file(path, obj_string(m));
}

TriMesh read_obj(const std::string& path) {
  const std::string text = io::read_text_file(path);
  std::istringstream in(text);
  std::string line;
  std::vector<Vec3> vs;
  std::vector<Eigen::Vector3i> fs;
  int grid_rows = 0, grid_cols = 0;
  while (std::getline(in, line)) {
    if (line.rfind("# lamlab grid ", 0) == 0) {
      std::istringstream ls(line.substr(14));
      ls >> grid_rows >> grid_cols;
    } else if (line.rfind("v ", 0) == 0) {
      std::istringstream ls(line.substr(2));
      Vec3 p;
      ls >> p.x() >> p.y() >> p.z();
      vs.push_back(p);
    } else if (line.rfind("f ", 0) == 0) {
      std::istringstream ls(line.substr(2));
      Eigen::Vector3i f;
      ls >> f.x() >> f.y() >> f.z();
      fs.push_back(f - Eigen::Vector3i::Ones());
    }
  }
  TriMesh m;
  m.V.resize(vs.size(), 3);
  for (std::size_t i = 0; i < vs.size(); ++i) m.V.row(i) = vs[i];
  m.F.resize(fs.size(), 3);
  for (std::size_t i = 0; i < fs.size(); ++i) m.F.row(i) = fs[i];
  m.grid_rows = grid_rows;
  m.grid_cols = grid_cols;
  m.init_attributes();
  recompute_boundary_flags(m);
  return m;
}

void write_sidecar_csv(const TriMesh& m, const std::string& path) {
  io::CsvWriter csv({"vertex_id", "role", "r", "theta_unwrapped", "grid_row", "grid_col"});
  for (int v = 0; v < m.vertex_count(); ++v) {
    int row = -1, col = -1;
    if (m.has_grid()) {
      row = v / m.grid_cols;
      col = v % m.grid_cols;
    }
    csv.row({std::to_string(v), role_name(m.role[v]), io::fmt(m.chart_r[v]),
             io::fmt(m.chart_theta[v]), std::to_string(row), std::to_string(col)});
  }
  csv.save(path);
}

void read_sidecar_csv(TriMesh& m, const std::string& path) {
  const std::string text = io::read_text_file(path);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = io::split_csv_line(line);
    if (cells.size() < 4) continue;
    const int v = std::stoi(cells[0]);
    if (v < 0 || v >= m.vertex_count()) continue;
    m.role[v] = role_from_name(cells[1]);
    m.chart_r[v] = std::stod(cells[2]);
    m.chart_theta[v] = std::stod(cells[3]);
  }
}

}  // namespace lamlab::geom
