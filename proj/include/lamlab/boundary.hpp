#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lamlab/geom.hpp"
#include "lamlab/kset.hpp"

namespace lamlab::boundary {

struct ProfileParams {
  int n = 1;                     // winding scale
  double lambda0 = 2.0 * 3.14159265358979323846;  // base rate, rad per unit z
  double eta = 0.05;             // end-collar width as a fraction of (b - a)
  double a = 0.0;
  double b = 1.0;
};

/// Monotone winding angle theta(z) on [a, b].
///
/// The rate is c(z) * (lambda0 + min(n, 1/(dist(z,K) + 1/n))) where c freezes
/// the rate to its collar-edge value on the two end collars, so theta has all
/// higher derivatives zero at the endpoints.  theta(a) = 0.  The cumulative
/// angle is tabulated on a rate-adaptive grid (kinks of dist are nodes) and
/// evaluated by monotone cubic Hermite interpolation with the exact rate as
/// slope; node values come from adaptive Simpson quadrature.
struct WindingProfile {
  ProfileParams params;
  kset::ClosedSetSpec K;
  std::vector<double> z_nodes;
  std::vector<double> theta_nodes;
  std::vector<double> rate_nodes;

  double rate(double z) const;
  double angle(double z) const;
  /// Inverse of angle(); theta must lie in [0, total_angle()].
  double z_at_angle(double theta) const;
  double total_angle() const { return theta_nodes.back(); }
  /// z-values where the rate is only C^0 (member endpoints, gap midpoints,
  /// collar edges); the sampler places samples at these.
  std::vector<double> breakpoints() const;
};

WindingProfile build_profile(const kset::ClosedSetSpec& K, const ProfileParams& params);

/// Helix sample stations: z ascending, theta = profile angle at z.
struct GammaSamples {
  std::vector<double> z;
  std::vector<double> theta;
  std::size_t size() const { return z.size(); }
  Vec3 point(std::size_t i) const;
};

/// Adaptive sampling of the helix so consecutive samples satisfy
/// dtheta <= theta_step_max and dz <= z_step_max, with rate breakpoints
/// forced to be sample stations.  Throws if the cap of 10^6 samples would
/// be exceeded.
GammaSamples sample_gamma(const WindingProfile& profile, double theta_step_max,
                          double z_step_max);

enum class LoopRole : std::uint8_t { Helix = 0, RadialTop = 1, Axis = 2, RadialBottom = 3 };

const char* loop_role_name(LoopRole r);

/// Closed boundary polyline: helix ascending on r = 1, radial segment at
/// z = b in to the axis, axis descending, radial segment at z = a back out to
/// the first helix sample.  points.front() == points.back(); every distinct
/// sample carries exactly one role.
struct BoundaryLoop {
  std::vector<Vec3> points;
  std::vector<LoopRole> roles;
  std::vector<double> theta;   // unwrapped angle labels (axis carries theta(z))
  std::vector<double> z_helix; // helix stations, ascending
  std::vector<double> theta_helix;
  int n_radial = 16;           // radial subdivision: samples at r = i/n_radial
  double a = 0.0, b = 1.0;

  std::size_t size() const { return points.size(); }
  double length() const;
};

BoundaryLoop assemble_boundary(const GammaSamples& samples, double a, double b, int n_radial);

void write_loop_csv(const BoundaryLoop& loop, const std::string& path);
void write_loop_obj(const BoundaryLoop& loop, const std::string& path);

}  // namespace lamlab::boundary
