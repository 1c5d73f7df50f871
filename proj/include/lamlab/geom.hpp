#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace lamlab {

using Vec3 = Eigen::Vector3d;

namespace geom {

enum class VertexRole : std::uint8_t { Interior = 0, Helix = 1, Axis = 2, Radial = 3 };

const char* role_name(VertexRole r);
VertexRole role_from_name(const std::string& name);

/// Triangulated disk with per-vertex multigraph chart (r, unwrapped theta).
///
/// Vertices and faces are plain index-based Eigen arrays; adjacency is derived
/// on demand by the passes that need it.  Meshes produced by the Plateau stage
/// are structured grids: vertex (i,j) of an rows x cols grid has index
/// i*cols + j, row 0 on the axis and row rows-1 on the helix.  grid_rows == 0
/// marks an unstructured mesh (e.g. test fixtures, imported files).
struct TriMesh {
  Eigen::Matrix<double, Eigen::Dynamic, 3> V;
  Eigen::Matrix<int, Eigen::Dynamic, 3> F;
  std::vector<VertexRole> role;
  std::vector<std::uint8_t> on_boundary;
  Eigen::VectorXd chart_r;
  Eigen::VectorXd chart_theta;
  int grid_rows = 0;
  int grid_cols = 0;

  int vertex_count() const { return static_cast<int>(V.rows()); }
  int face_count() const { return static_cast<int>(F.rows()); }
  bool has_grid() const { return grid_rows > 0 && grid_cols > 0; }
  int grid_vertex(int i, int j) const { return i * grid_cols + j; }

  /// Allocates attribute arrays to match V; roles Interior, flags off, chart zero.
  void init_attributes();
  double bbox_diagonal() const;
};

/// Orientation-preserving rigid motion p -> R p + t.
/// Built from rotations about the z-axis and half-turns about horizontal
/// lines (the two motions Schwarz reflection needs), plus their compositions.
struct Isometry {
  Eigen::Matrix3d R;
  Vec3 t;

  static Isometry identity();
  static Isometry rotate_about_z(double angle);
  /// Half-turn (rotation by pi) about the line through `point` with unit
  /// horizontal direction `dir` (dir.z must be 0).
  static Isometry half_turn_about_line(const Vec3& point, const Vec3& dir);
  /// Composition: (a.then(b))(p) == b(a(p)).
  Isometry then(const Isometry& next) const;
};

Vec3 apply_isometry(const Isometry& iso, const Vec3& p);
/// Applies the motion to every vertex; connectivity, roles and chart are kept.
TriMesh apply_isometry(const Isometry& iso, const TriMesh& m);

struct MeshValidation {
  struct Failure {
    std::string check;
    std::string detail;
  };
  bool ok = false;
  std::vector<Failure> failures;
  int euler_characteristic = 0;
  int boundary_loops = 0;
  double min_triangle_area = 0.0;
};

/// Structural report: disk topology (chi == 1), manifoldness, consistent
/// orientation, a single closed boundary loop, triangle areas above the floor,
/// and boundary flags matching edge incidence.  Never throws; failures are
/// collected in the report.
MeshValidation validate_mesh(const TriMesh& m, double area_floor = 0.0);

using RegionPred = std::function<bool(const Vec3&)>;

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Thrown by mesh_distance when the region filter leaves nothing to compare.
struct NoSamplesInRegion : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Symmetric min over vertex-to-triangle distances, restricted to the region:
/// source vertices must satisfy the predicate, target triangles must have all
/// three corners inside it.  Uses a uniform spatial grid; equals the
/// brute-force pairwise minimum.
double mesh_distance(const TriMesh& a, const TriMesh& b, const RegionPred& region);

double mean_edge_length(const TriMesh& m);

/// Brute-ish self-intersection scan (grid-binned) over triangles whose
/// vertices all lie in the region; adjacent triangles are skipped.
bool has_self_intersections(const TriMesh& m, const RegionPred& region);

// Wavefront OBJ ("v x y z" / "f i j k", 1-based).  Grid dimensions are kept
// in a leading "# lamlab grid rows cols" comment so structured meshes survive
// a round trip.
void write_obj(const TriMesh& m, const std::string& path);
std::string obj_string(const TriMesh& m);
TriMesh read_obj(const std::string& path);

// Sidecar CSV: vertex_id, role, r, theta_unwrapped, grid_row, grid_col.
void write_sidecar_csv(const TriMesh& m, const std::string& path);
void read_sidecar_csv(TriMesh& m, const std::string& path);

/// Recomputes on_boundary from edge incidence (edges with one incident face).
void recompute_boundary_flags(TriMesh& m);

}  // namespace geom
}  // namespace lamlab
