#pragma once

#include <stdexcept>
#include <vector>

#include "lamlab/geom.hpp"

namespace lamlab::reflect {

struct WeldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Glues b onto a by identifying paired boundary vertices (ids_a[k] with
/// ids_b[k]); pairs farther apart than tol raise WeldError.  b's triangle
/// winding is flipped when needed for a consistently oriented result, and the
/// weld must leave the mesh manifold.
geom::TriMesh weld(const geom::TriMesh& a, const geom::TriMesh& b, const std::vector<int>& ids_a,
                   const std::vector<int>& ids_b, double tol);

/// Repeated Schwarz reflection across the radial boundary lines: `levels`
/// half-turn copies are welded on above and below, continuing the unwrapped
/// chart across each weld.  levels == 0 returns the input unchanged.
geom::TriMesh schwarz_extend(const geom::TriMesh& m, int levels, double weld_tol = 1e-9);

/// Welds m with its half-turn image about the axis along the axis chain; the
/// axis becomes interior and the result is again a disk.  The copy's chart is
/// offset by pi.
geom::TriMesh axis_double(const geom::TriMesh& m, double weld_tol = 1e-9);

}  // namespace lamlab::reflect
