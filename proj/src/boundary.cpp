#include "lamlab/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "lamlab/io.hpp"

namespace lamlab::boundary {

namespace {

double raw_rate(double z, const kset::ClosedSetSpec& K, const ProfileParams& p) {
  const double d = kset::distance(z, K);
  const double n = static_cast<double>(p.n);
  double surge = 0.0;
  if (std::isfinite(d)) surge = std::min(n, 1.0 / (d + 1.0 / n));
  return p.lambda0 + surge;
}

// Recursive adaptive Simpson on one smooth piece.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (b <= a) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

// Hermite cubic on [z0,z1] with values t0,t1 and slopes s0,s1.
double hermite(double z, double z0, double z1, double t0, double t1, double s0, double s1) {
  const double h = z1 - z0;
  const double u = (z - z0) / h;
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * t0 + (u3 - 2 * u2 + u) * h * s0 +
         (-2 * u3 + 3 * u2) * t1 + (u3 - u2) * h * s1;
}

}  // namespace

double WindingProfile::rate(double z) const {
  const double span = params.b - params.a;
  const double lo = params.a + params.eta * span;
  const double hi = params.b - params.eta * span;
  const double zc = std::clamp(z, lo, hi);  // collar freeze
  return raw_rate(zc, K, params);
}

std::vector<double> WindingProfile::breakpoints() const {
  const double span = params.b - params.a;
  std::vector<double> bps{params.a, params.b, params.a + params.eta * span,
                          params.b - params.eta * span};
  const auto ms = K.members();
  for (const auto& iv : ms) {
    bps.push_back(iv.lo);
    bps.push_back(iv.hi);
  }
  // Gap midpoints: the nearest-member switch makes dist only C^0 there.
  for (std::size_t i = 1; i < ms.size(); ++i) bps.push_back(0.5 * (ms[i - 1].hi + ms[i].lo));
  std::sort(bps.begin(), bps.end());
  std::vector<double> out;
  for (double z : bps) {
    if (z < params.a - 1e-15 || z > params.b + 1e-15) continue;
    z = std::clamp(z, params.a, params.b);
    if (out.empty() || z - out.back() > 1e-13 * std::max(1.0, span)) out.push_back(z);
  }
  return out;
}

double WindingProfile::angle(double z) const {
  if (z < params.a - 1e-12 || z > params.b + 1e-12)
    throw std::out_of_range("winding angle queried outside [a, b]");
  z = std::clamp(z, params.a, params.b);
  const auto it = std::upper_bound(z_nodes.begin(), z_nodes.end(), z);
  std::size_t i = (it == z_nodes.begin()) ? 0 : static_cast<std::size_t>(it - z_nodes.begin()) - 1;
  if (i + 1 >= z_nodes.size()) i = z_nodes.size() - 2;
  return hermite(z, z_nodes[i], z_nodes[i + 1], theta_nodes[i], theta_nodes[i + 1], rate_nodes[i],
                 rate_nodes[i + 1]);
}

double WindingProfile::z_at_angle(double theta) const {
  if (theta <= 0.0) return params.a;
  if (theta >= total_angle()) return params.b;
  auto it = std::upper_bound(theta_nodes.begin(), theta_nodes.end(), theta);
  std::size_t i = static_cast<std::size_t>(it - theta_nodes.begin());
  i = (i == 0) ? 0 : i - 1;
  if (i + 1 >= z_nodes.size()) i = z_nodes.size() - 2;
  // Bisection on the monotone Hermite cell.
  double lo = z_nodes[i], hi = z_nodes[i + 1];
  for (int iter = 0; iter < 80 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (angle(mid) < theta)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

WindingProfile build_profile(const kset::ClosedSetSpec& K, const ProfileParams& params) {
  if (params.n < 1) throw std::invalid_argument("profile: n must be >= 1");
  if (params.lambda0 <= 0) throw std::invalid_argument("profile: lambda0 must be positive");
  if (!(params.b > params.a)) throw std::invalid_argument("profile: empty z-range");
  if (params.eta < 0 || params.eta >= 0.5)
    throw std::invalid_argument("profile: collar width must lie in [0, 0.5)");

  WindingProfile prof;
  prof.params = params;
  prof.K = K;

  auto f = [&prof](double z) { return prof.rate(z); };

  const auto pieces = prof.breakpoints();
  const double span = params.b - params.a;
  prof.z_nodes.push_back(params.a);
  prof.theta_nodes.push_back(0.0);
  prof.rate_nodes.push_back(f(params.a));

  for (std::size_t p = 0; p + 1 < pieces.size(); ++p) {
    const double z0 = pieces[p], z1 = pieces[p + 1];
    // Subdivide each smooth piece so a cell covers at most ~0.02 rad and
    // at most span/256 in z; steep zones near K get dense nodes.
    const double piece_theta = integrate(f, z0, z1, 1e-13);
    int cells = std::max(2, static_cast<int>(std::ceil(piece_theta / 0.02)));
    cells = std::max(cells, static_cast<int>(std::ceil((z1 - z0) / (span / 256.0))));
    cells = std::min(cells, 200000);
    for (int c = 1; c <= cells; ++c) {
      const double za = z0 + (z1 - z0) * (c - 1) / cells;
      const double zb = (c == cells) ? z1 : z0 + (z1 - z0) * c / cells;
      const double inc = integrate(f, za, zb, 1e-14 * std::max(1.0, piece_theta));
      prof.z_nodes.push_back(zb);
      prof.theta_nodes.push_back(prof.theta_nodes.back() + inc);
      prof.rate_nodes.push_back(f(zb));
    }
  }
  return prof;
}

Vec3 GammaSamples::point(std::size_t i) const {
  return Vec3(std::cos(theta[i]), std::sin(theta[i]), z[i]);
}

GammaSamples sample_gamma(const WindingProfile& profile, double theta_step_max,
                          double z_step_max) {
  if (theta_step_max <= 0) throw std::invalid_argument("sample_gamma: theta_step_max must be > 0");
  if (z_step_max <= 0) throw std::invalid_argument("sample_gamma: z_step_max must be > 0");
  constexpr std::size_t kMaxSamples = 1000000;

  const double a = profile.params.a, b = profile.params.b;
  const auto forced = profile.breakpoints();
  std::size_t next_forced = 0;

  GammaSamples s;
  double z = a;
  s.z.push_back(z);
  s.theta.push_back(0.0);
  while (z < b - 1e-15 * std::max(1.0, std::abs(b))) {
    const double th = profile.angle(z);
    double z_next = std::min({profile.z_at_angle(th + theta_step_max), z + z_step_max, b});
    while (next_forced < forced.size() && forced[next_forced] <= z + 1e-14) next_forced++;
    if (next_forced < forced.size()) {
      const double station = forced[next_forced];
      if (station < z_next - 1e-14) {
        z_next = station;
      } else if (std::abs(z_next - station) <= 1e-14) {
        z_next = station;
      } else if (station - z_next < 0.5 * (z_next - z)) {
        // Landing just short of a forced station would leave a sliver column;
        // split the remaining gap evenly instead.
        z_next = z + 0.5 * (station - z);
      }
    }
    if (z_next <= z) z_next = std::min(b, z + 1e-12);  // guard against stalls
    z = z_next;
    s.z.push_back(z);
    s.theta.push_back(profile.angle(z));
    if (s.z.size() > kMaxSamples)
      throw std::runtime_error(
          "sample_gamma: sample cap (1e6) exceeded; lower n, the Cantor depth, or the step caps");
  }
  s.z.back() = b;
  s.theta.back() = profile.total_angle();
  return s;
}

const char* loop_role_name(LoopRole r) {
  switch (r) {
    case LoopRole::Helix: return "helix";
    case LoopRole::RadialTop: return "radial-top";
    case LoopRole::Axis: return "axis";
    case LoopRole::RadialBottom: return "radial-bottom";
  }
  return "helix";
}

BoundaryLoop assemble_boundary(const GammaSamples& samples, double a, double b, int n_radial) {
  if (samples.size() < 2) throw std::invalid_argument("assemble_boundary: need >= 2 samples");
  if (n_radial < 1) throw std::invalid_argument("assemble_boundary: n_radial must be >= 1");
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (!(samples.z[i] > samples.z[i - 1]))
      throw std::invalid_argument("assemble_boundary: samples not strictly increasing in z");
  if (std::abs(samples.z.front() - a) > 1e-12 || std::abs(samples.z.back() - b) > 1e-12)
    throw std::invalid_argument("assemble_boundary: samples do not cover [a, b]");

  BoundaryLoop loop;
  loop.a = a;
  loop.b = b;
  loop.n_radial = n_radial;
  loop.z_helix = samples.z;
  loop.theta_helix = samples.theta;

  const std::size_t m = samples.size();
  const double theta_top = samples.theta.back();
  const double ct = std::cos(theta_top), st = std::sin(theta_top);
  const double theta_bot = samples.theta.front();  // 0 by convention
  const double cb = std::cos(theta_bot), sb = std::sin(theta_bot);

  // Helix ascending.
  for (std::size_t i = 0; i < m; ++i) {
    loop.points.push_back(samples.point(i));
    loop.roles.push_back(LoopRole::Helix);
    loop.theta.push_back(samples.theta[i]);
  }
  // Radial at z = b, from r just inside 1 down to the axis (exclusive of the
  // helix endpoint, inclusive of nothing at r=0: the axis chain owns it).
  for (int i = n_radial - 1; i >= 1; --i) {
    const double r = static_cast<double>(i) / n_radial;
    loop.points.push_back(Vec3(r * ct, r * st, b));
    loop.roles.push_back(LoopRole::RadialTop);
    loop.theta.push_back(theta_top);
  }
  // Axis descending at the helix z-resolution.
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = m - 1 - i;
    loop.points.push_back(Vec3(0, 0, samples.z[j]));
    loop.roles.push_back(LoopRole::Axis);
    loop.theta.push_back(samples.theta[j]);
  }
  // Radial at z = a back out to the first helix sample.
  for (int i = 1; i <= n_radial - 1; ++i) {
    const double r = static_cast<double>(i) / n_radial;
    loop.points.push_back(Vec3(r * cb, r * sb, a));
    loop.roles.push_back(LoopRole::RadialBottom);
    loop.theta.push_back(theta_bot);
  }
  // Closure: repeat the first point.
  loop.points.push_back(loop.points.front());
  loop.roles.push_back(LoopRole::Helix);
  loop.theta.push_back(loop.theta.front());

  if ((loop.points.front() - loop.points.back()).norm() > 1e-9)
    throw std::runtime_error("assemble_boundary: loop closure gap exceeds 1e-9");
  return loop;
}

double BoundaryLoop::length() const {
  double len = 0;
  for (std::size_t i = 1; i < points.size(); ++i) len += (points[i] - points[i - 1]).norm();
  return len;
}

void write_loop_csv(const BoundaryLoop& loop, const std::string& path) {
  io::CsvWriter csv({"s", "x", "y", "z", "role", "theta_unwrapped"});
  double s = 0;
  for (std::size_t i = 0; i < loop.points.size(); ++i) {
    if (i) s += (loop.points[i] - loop.points[i - 1]).norm();
    csv.row({io::fmt(s), io::fmt(loop.points[i].x()), io::fmt(loop.points[i].y()),
             io::fmt(loop.points[i].z()), loop_role_name(loop.roles[i]), io::fmt(loop.theta[i])});
  }
  csv.save(path);
}

void write_loop_obj(const BoundaryLoop& loop, const std::string& path) {
  std::string out;
  for (const auto& p : loop.points)
    out += "v " + io::fmt(p.x()) + " " + io::fmt(p.y()) + " " + io::fmt(p.z()) + "\n";
  out += "l";
  for (std::size_t i = 1; i <= loop.points.size(); ++i) out += " " + std::to_string(i);
  out += "\n";
  io::write_text_file(path, out);
}

}  // namespace lamlab::boundary
