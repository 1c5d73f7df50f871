#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lamlab/boundary.hpp"
#include "lamlab/geom.hpp"

namespace lamlab::plateau {

struct SolverParams {
  int max_iterations = 500;
  /// Stop when the max vertex displacement of an iteration falls below
  /// tol_disp_rel * initial bounding-box diagonal.
  double tol_disp_rel = 1e-7;
  /// Cotangent edge weights are capped at w_max in magnitude.  w_min is the
  /// positive floor used by the fallback assembly when the clamped system
  /// fails to solve (near-degenerate geometry).
  double w_min = 1e-6;
  double w_max = 1e6;
  /// Triangles below area_floor_rel * total area count as degenerate.
  double area_floor_rel = 1e-12;
  double damping = 1.0;
  /// Iterative solve: relative residual target and iteration budget factor.
  double linear_tol = 1e-10;
  int linear_iters_per_vertex = 10;
};

enum class SolveStatus { Converged, MaxIterations, Degenerate };

const char* status_name(SolveStatus s);

struct IterationStats {
  int iter = 0;
  double area = 0;
  double max_disp = 0;
  double residual = 0;
  bool clamped = false;
};

struct SolveRecord {
  std::vector<IterationStats> iterations;
  SolveStatus status = SolveStatus::MaxIterations;
  double final_residual = 0;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Ruled initial guess over the (r, theta) grid: vertex (i,j) at
/// (r_i cos theta_j, r_i sin theta_j, z_j) with r_i = i/N_r.  Row 0 is the
/// axis, row N_r the helix, columns 0 and M-1 the two radial segments; the
/// grid perimeter coincides with the boundary loop samples.  The loop's
/// radial subdivision must equal N_r.
geom::TriMesh initial_mesh(const boundary::BoundaryLoop& loop, int n_r);

double area(const geom::TriMesh& m);
double min_triangle_area(const geom::TriMesh& m);

/// One outer iteration: solve the clamped cotangent-Laplace system restricted
/// to the normal bundle (one SPD solve for the per-vertex normal displacement,
/// boundary pinned), apply the damped normal motion, and update the chart by
/// angle continuation.  The normal restriction keeps the (r, theta) grid
/// layout intact; unrestricted per-coordinate solves let vertices slide
/// tangentially until corner slivers collapse.  Sets *clamped when any weight
/// was capped or the fallback assembly was used.
geom::TriMesh dirichlet_step(const geom::TriMesh& m, const SolverParams& params,
                             bool* clamped = nullptr);

/// Iterated least-area solve; returns the final mesh and the iteration record.
std::pair<geom::TriMesh, SolveRecord> solve_plateau(const boundary::BoundaryLoop& loop, int n_r,
                                                    const SolverParams& params);

/// Max over interior vertices of the normal-projected cotangent Laplacian of
/// position / (2 * mixed area), nondimensionalized by the bounding-box
/// diagonal: a discrete mean-curvature magnitude.
double mean_curvature_residual(const geom::TriMesh& m);

/// Per-vertex version of the above (boundary entries are 0).
Eigen::VectorXd residual_per_vertex(const geom::TriMesh& m);

/// Meyer-style mixed Voronoi vertex areas.
Eigen::VectorXd mixed_voronoi_areas(const geom::TriMesh& m);

void write_solve_csv(const SolveRecord& rec, const std::string& path);

}  // namespace lamlab::plateau
