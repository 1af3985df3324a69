#include "otfs_rach/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "otfs_rach/types.hpp"

namespace otfs {
namespace {

constexpr double kEarthGM = 3.986004418e14;
constexpr int kElevationSteps = 720;
constexpr int kAzimuthSteps = 360;

using Vec3 = std::array<double, 3>;

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double norm(const Vec3& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }

}  // namespace

void GeometryConfig::validate() const {
  if (!(altitude_m > 0.0)) throw ConfigError("geometry.altitude_m", "must be positive");
  if (!(min_elevation_deg > 0.0 && min_elevation_deg < 90.0)) {
    throw ConfigError("geometry.min_elevation_deg", "must lie in (0, 90)");
  }
  if (!(earth_radius_m > 0.0)) throw ConfigError("geometry.earth_radius_m", "must be positive");
  if (!(carrier_hz > 0.0)) throw ConfigError("geometry.carrier_hz", "must be positive");
  if (!(cfo_factor > 0.0)) throw ConfigError("geometry.cfo_factor", "must be positive");
  if (!(to_factor > 0.0)) throw ConfigError("geometry.to_factor", "must be positive");
}

double orbital_speed_mps(const GeometryConfig& geo) { return std::sqrt(kEarthGM / (geo.earth_radius_m + geo.altitude_m)); }

UncertaintyOffsets uncertainty_offsets(double r_eps_m, const GeometryConfig& geo) {
  geo.validate();
  if (!(r_eps_m >= 0.0)) throw DomainError("uncertainty_offsets: r_eps must be >= 0");
  UncertaintyOffsets out;
  if (r_eps_m == 0.0) return out;

  const double R = geo.earth_radius_m;
  const double eps = geo.min_elevation_deg * kPi / 180.0;
  // Earth central angle between sub-satellite point and a ground point at elevation eps.
  const double theta_max = std::acos(R * std::cos(eps) / (R + geo.altitude_m)) - eps;
  const Vec3 S{0.0, 0.0, R + geo.altitude_m};
  const double v = orbital_speed_mps(geo);
  const double arc = r_eps_m / R;

  double dd_max = 0.0;
  double dv_max = 0.0;
  for (int it = 0; it <= kElevationSteps; ++it) {
    const double th = theta_max * it / kElevationSteps;
    const Vec3 P{R * std::sin(th), 0.0, R * std::cos(th)};
    const Vec3 e1{std::cos(th), 0.0, -std::sin(th)};
    const Vec3 e2{0.0, 1.0, 0.0};
    const Vec3 sp = sub(S, P);
    const double d0 = norm(sp);
    for (int ia = 0; ia < kAzimuthSteps; ++ia) {
      const double phi = kTwoPi * ia / kAzimuthSteps;
      Vec3 Pq;
      for (int c = 0; c < 3; ++c) {
        Pq[c] = std::cos(arc) * P[c] + R * std::sin(arc) * (std::cos(phi) * e1[c] + std::sin(phi) * e2[c]);
      }
      const Vec3 sq = sub(S, Pq);
      const double d1 = norm(sq);
      dd_max = std::max(dd_max, std::abs(d1 - d0));
      // The velocity is horizontal at the satellite; maximizing over its heading
      // leaves the horizontal part of the line-of-sight difference.
      const double dx = sq[0] / d1 - sp[0] / d0;
      const double dy = sq[1] / d1 - sp[1] / d0;
      dv_max = std::max(dv_max, v * std::hypot(dx, dy));
    }
  }
  out.slant_range_diff_m = dd_max;
  out.radial_velocity_diff_mps = dv_max;
  out.to_max_s = geo.to_factor * dd_max / kSpeedOfLight;
  out.cfo_max_hz = geo.cfo_factor * geo.carrier_hz / kSpeedOfLight * dv_max;
  return out;
}

}  // namespace otfs
