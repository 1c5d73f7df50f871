#include "lamlab/reflect.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace lamlab::reflect {

namespace {

geom::TriMesh weld_impl(const geom::TriMesh& a, const geom::TriMesh& b,
                        const std::vector<int>& ids_a, const std::vector<int>& ids_b, double tol,
                        std::vector<int>* b_map_out) {
  if (ids_a.size() != ids_b.size())
    throw WeldError("weld: paired boundary chains have different lengths");
  for (std::size_t k = 0; k < ids_a.size(); ++k) {
    const double d = (a.V.row(ids_a[k]) - b.V.row(ids_b[k])).norm();
    if (d > tol)
      throw WeldError("weld: paired vertices differ by " + std::to_string(d) +
                      " (tolerance " + std::to_string(tol) + ")");
  }

  const int na = a.vertex_count();
  std::vector<int> b_map(b.vertex_count(), -1);
  for (std::size_t k = 0; k < ids_a.size(); ++k) b_map[ids_b[k]] = ids_a[k];
  int next = na;
  for (int v = 0; v < b.vertex_count(); ++v)
    if (b_map[v] < 0) b_map[v] = next++;

  geom::TriMesh out;
  out.V.resize(next, 3);
  out.V.topRows(na) = a.V;
  out.init_attributes();
  for (int v = 0; v < na; ++v) {
    out.role[v] = a.role[v];
    out.chart_r[v] = a.chart_r[v];
    out.chart_theta[v] = a.chart_theta[v];
  }
  for (int v = 0; v < b.vertex_count(); ++v) {
    const int w = b_map[v];
    if (w >= na) {
      out.V.row(w) = b.V.row(v);
      out.role[w] = b.role[v];
      out.chart_r[w] = b.chart_r[v];
      out.chart_theta[w] = b.chart_theta[v];
    }
  }

  // Consistent global orientation: if any mapped directed edge of b already
  // appears in a with the same direction, b's winding must be flipped.
  std::set<std::pair<int, int>> directed;
  for (int f = 0; f < a.face_count(); ++f)
    for (int k = 0; k < 3; ++k) directed.insert({a.F(f, k), a.F(f, (k + 1) % 3)});
  bool flip = false;
  for (int f = 0; f < b.face_count() && !flip; ++f)
    for (int k = 0; k < 3; ++k) {
      const int u = b_map[b.F(f, k)], v = b_map[b.F(f, (k + 1) % 3)];
      if (directed.count({u, v})) {
        flip = true;
        break;
      }
    }

  out.F.resize(a.face_count() + b.face_count(), 3);
  out.F.topRows(a.face_count()) = a.F;
  for (int f = 0; f < b.face_count(); ++f) {
    int i0 = b_map[b.F(f, 0)], i1 = b_map[b.F(f, 1)], i2 = b_map[b.F(f, 2)];
    if (flip) std::swap(i1, i2);
    out.F.row(a.face_count() + f) = Eigen::Vector3i(i0, i1, i2);
  }

  geom::recompute_boundary_flags(out);
  const auto check = geom::validate_mesh(out);
  for (const auto& fail : check.failures)
    if (fail.check == "manifold" || fail.check == "orientation")
      throw WeldError("weld: " + fail.check + " violation: " + fail.detail);

  if (b_map_out) *b_map_out = std::move(b_map);
  return out;
}

std::vector<int> grid_column(const geom::TriMesh& m, int j) {
  std::vector<int> ids;
  ids.reserve(m.grid_rows);
  for (int i = 0; i < m.grid_rows; ++i) ids.push_back(m.grid_vertex(i, j));
  return ids;
}

std::vector<int> grid_row_ids(const geom::TriMesh& m, int i) {
  std::vector<int> ids;
  ids.reserve(m.grid_cols);
  for (int j = 0; j < m.grid_cols; ++j) ids.push_back(m.grid_vertex(i, j));
  return ids;
}

// Half-turn image of `strip` about the radial line through its chain
// (ids ordered axis -> helix), with the chart continued across the line.
geom::TriMesh reflected_copy(const geom::TriMesh& strip, const std::vector<int>& chain,
                             double theta_line) {
  const Vec3 axis_pt = strip.V.row(chain.front());
  const Vec3 helix_pt = strip.V.row(chain.back());
  Vec3 dir = helix_pt - axis_pt;
  dir.z() = 0;
  const auto iso = geom::Isometry::half_turn_about_line(axis_pt, dir.normalized());
  geom::TriMesh copy = geom::apply_isometry(iso, strip);
  for (int v = 0; v < copy.vertex_count(); ++v)
    copy.chart_theta[v] = 2.0 * theta_line - strip.chart_theta[v];
  return copy;
}

}  // namespace

geom::TriMesh weld(const geom::TriMesh& a, const geom::TriMesh& b, const std::vector<int>& ids_a,
                   const std::vector<int>& ids_b, double tol) {
  return weld_impl(a, b, ids_a, ids_b, tol, nullptr);
}

geom::TriMesh schwarz_extend(const geom::TriMesh& m, int levels, double weld_tol) {
  if (levels < 0) throw std::invalid_argument("schwarz_extend: levels must be >= 0");
  if (levels == 0) return m;
  if (!m.has_grid())
    throw std::invalid_argument("schwarz_extend: requires a grid-structured solve mesh");

  const int top_col = m.grid_cols - 1;

  geom::TriMesh strip = m;
  // Chains in the accumulated strip; both start as plain grid columns.
  std::vector<int> strip_top = grid_column(m, top_col);
  std::vector<int> strip_bottom = grid_column(m, 0);

  // Upward: reflect the previous copy about the current top line.  The
  // reflected image of the previous bottom chain becomes the new top.
  {
    geom::TriMesh prev = m;
    std::vector<int> weld_chain = grid_column(m, top_col);  // prev's top, local ids
    std::vector<int> far_chain = grid_column(m, 0);         // prev's bottom, local ids
    double th_top = m.chart_theta[weld_chain.back()];
    double th_bottom = m.chart_theta[far_chain.back()];
    for (int level = 0; level < levels; ++level) {
      geom::TriMesh copy = reflected_copy(prev, weld_chain, th_top);
      std::vector<int> b_map;
      strip = weld_impl(strip, copy, strip_top, weld_chain, weld_tol, &b_map);
      strip_top.clear();
      for (int id : far_chain) strip_top.push_back(b_map[id]);
      const double new_top = 2.0 * th_top - th_bottom;
      th_bottom = th_top;
      th_top = new_top;
      std::swap(weld_chain, far_chain);
      prev = std::move(copy);
    }
  }
  // Downward: same procedure about the bottom line.
  {
    geom::TriMesh prev = m;
    std::vector<int> weld_chain = grid_column(m, 0);
    std::vector<int> far_chain = grid_column(m, top_col);
    double th_bottom = m.chart_theta[weld_chain.back()];
    double th_top = m.chart_theta[far_chain.back()];
    for (int level = 0; level < levels; ++level) {
      geom::TriMesh copy = reflected_copy(prev, weld_chain, th_bottom);
      std::vector<int> b_map;
      strip = weld_impl(strip, copy, strip_bottom, weld_chain, weld_tol, &b_map);
      strip_bottom.clear();
      for (int id : far_chain) strip_bottom.push_back(b_map[id]);
      const double new_bottom = 2.0 * th_bottom - th_top;
      th_top = th_bottom;
      th_bottom = new_bottom;
      std::swap(weld_chain, far_chain);
      prev = std::move(copy);
    }
  }
  strip.grid_rows = strip.grid_cols = 0;
  return strip;
}

geom::TriMesh axis_double(const geom::TriMesh& m, double weld_tol) {
  std::vector<int> axis_chain;
  if (m.has_grid()) {
    axis_chain = grid_row_ids(m, 0);
  } else {
    for (int v = 0; v < m.vertex_count(); ++v)
      if (m.role[v] == geom::VertexRole::Axis) axis_chain.push_back(v);
    std::sort(axis_chain.begin(), axis_chain.end(),
              [&m](int u, int v) { return m.V(u, 2) < m.V(v, 2); });
  }
  if (axis_chain.empty())
    throw std::invalid_argument("axis_double: mesh has no axis-tagged samples");

  constexpr double kPi = 3.14159265358979323846;
  geom::TriMesh copy = geom::apply_isometry(geom::Isometry::rotate_about_z(kPi), m);
  for (int v = 0; v < copy.vertex_count(); ++v) copy.chart_theta[v] = m.chart_theta[v] + kPi;

  geom::TriMesh out = weld_impl(m, copy, axis_chain, axis_chain, weld_tol, nullptr);
  out.grid_rows = out.grid_cols = 0;
  return out;
}

}  // namespace lamlab::reflect
