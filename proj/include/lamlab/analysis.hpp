#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lamlab/geom.hpp"
#include "lamlab/kset.hpp"

namespace lamlab::analysis {

/// Angle defect 2*pi - sum of incident angles, per vertex (meaningful for
/// interior vertices; boundary entries are reported as-is).
Eigen::VectorXd angle_defects(const geom::TriMesh& m);

/// |A| estimate at interior vertices via the angle-defect Gaussian curvature
/// and minimality (|A|^2 = -2K): sqrt(2 * max(0, -K)).  Boundary entries are
/// NaN.
Eigen::VectorXd vertex_curvature(const geom::TriMesh& m);

/// Area-weighted vertex normals (unit length; zero where degenerate).
Eigen::MatrixX3d vertex_normals(const geom::TriMesh& m);

/// |nu_h| / |nu_z| per vertex; +inf sentinel when |nu_z| < 1e-14.
Eigen::VectorXd tangent_slope(const geom::TriMesh& m);

/// Min slope over boundary polyline edges lying in the open slab a < z < b
/// (the measured epsilon of the Rado hypothesis).
double measured_boundary_slope_min(const geom::TriMesh& m);

struct RadoResult {
  bool hypothesis_met = false;
  std::string hypothesis_detail;
  double epsilon = 0;
  double bound = 0;        // min(eps, delta / (2R))
  double tolerance = 0;    // 10% of the bound
  double min_interior_slope = 0;
  bool pass = false;
};

/// Slope lower bound on the delta-slab: every interior vertex with
/// a+delta < z < b-delta must have slope >= min(eps, delta/(2R)) - 10%.
/// The boundary restricted to the open slab must consist of two chains each
/// of slope >= eps, else no verdict is issued.
RadoResult rado_slope_check(const geom::TriMesh& m, double eps, double delta, double R = 1.0);

struct DegenerateSection : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Number of connected polyline components of the z = t section.
/// t is nudged by 1e-12 * z-range if a vertex lies exactly at height t; a
/// face entirely at height t raises DegenerateSection.
int level_set_arcs(const geom::TriMesh& m, double t);

struct MonotonicityResult {
  bool pass = false;
  double min_dz = 0;
  int worst_row = -1;
  int worst_col = -1;
};

/// z strictly increasing along each chart grid row (r > 0) in theta order.
MonotonicityResult theta_monotonicity(const geom::TriMesh& m);

/// Min pairwise mesh distance among `count` rotated copies (angles 2*pi*j /
/// count) restricted to r >= r_min; +inf when count < 2.
double foliation_disjointness(const geom::TriMesh& m, int count, double r_min);

struct JacobiResult {
  Eigen::VectorXd u;
  double min_u = 0;
  double tol = 0;
  bool pass = false;
};

/// u = nu . (-y, x, 0) with the per-vertex normal signed so nu_z <= 0 (the
/// downward multigraph convention that makes the helicoid positive).  Passes
/// when u >= -1e-6 * bbox diagonal at every interior off-axis vertex.
JacobiResult jacobi_positivity(const geom::TriMesh& m);

struct Patch {
  double r0 = 0.3, r1 = 0.9;
  double theta0 = 0, theta1 = 1;
  int nr = 24, ntheta = 24;
};

/// Max residual of the polar minimal surface equation over a finite-
/// difference resampling of the chart on the patch, nondimensionalized by the
/// bounding-box diagonal.  The chart must be single-valued over the patch.
double mse_residual_patch(const geom::TriMesh& m, const Patch& patch);

struct BlowupRow {
  int n = 0;
  double p = 0;          // K-sample height (NaN for the kappa_far-only row of empty K)
  double kappa_near = 0;
  double kappa_far = 0;
  bool near_empty = false;
  bool far_empty = false;
};

/// Near/far curvature table: kappa_near(p, n) is the max |A| over interior
/// vertices within (3D) distance rho of (0,0,p); kappa_far(n) is the max |A|
/// over interior vertices with distance >= 3*rho from K, r <= 0.9, and at
/// least rho above/below the slab ends.
std::vector<BlowupRow> blowup_series(const std::vector<std::pair<int, const geom::TriMesh*>>& solves,
                                     const kset::ClosedSetSpec& K, double rho);

/// Max |A| over interior vertices within `radius` of the axis point (0,0,z);
/// nullopt when no interior vertex lies in the ball.
std::optional<double> max_curvature_near_axis_point(const geom::TriMesh& m, double z,
                                                    double radius);

/// |A| at the interior vertex nearest to the axis point (0,0,z); nullopt for
/// meshes without interior vertices.  Used to probe complement-gap midpoints.
std::optional<double> curvature_at_nearest_vertex(const geom::TriMesh& m, double z);

/// Per-vertex table + scalar summaries of one mesh, ready for CSV/JSON.
struct AnalysisReport {
  Eigen::VectorXd absA;   // NaN on boundary
  Eigen::VectorXd slope;
  Eigen::VectorXd u;
  MonotonicityResult monotonicity;
  RadoResult rado;
  std::vector<int> level_arcs;
  std::vector<double> level_heights;
  bool level_sets_pass = false;
  double foliation_min_distance = 0;
  double foliation_threshold = 0;
  bool foliation_pass = false;
  JacobiResult jacobi;
  double residual = 0;
};

void write_vertices_csv(const geom::TriMesh& m, const AnalysisReport& rep,
                        const std::string& path);
void write_blowup_csv(const std::vector<BlowupRow>& rows, const std::string& path);

}  // namespace lamlab::analysis
