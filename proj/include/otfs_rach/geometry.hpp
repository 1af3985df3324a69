#pragma once

namespace otfs {

struct GeometryConfig {
  double altitude_m = 550e3;
  double min_elevation_deg = 30.0;
  double carrier_hz = 30e9;
  double earth_radius_m = 6371e3;
  // Residual CFO as a multiple of the single-path Doppler mismatch: one term from
  // the downlink frequency reference, one from uplink pre-compensation.
  double cfo_factor = 2.0;
  // Residual TO as a multiple of the one-way slant-range mismatch over c.
  double to_factor = 4.0;

  void validate() const;
};

struct UncertaintyOffsets {
  double to_max_s = 0.0;
  double cfo_max_hz = 0.0;
  double slant_range_diff_m = 0.0;
  double radial_velocity_diff_mps = 0.0;
};

// Worst-case residual timing and frequency offsets for a UE whose self-position
// error is bounded by a disc of radius r_eps. Spherical Earth, circular orbit,
// maximized over reference-point elevation, disc azimuth and orbit heading.
UncertaintyOffsets uncertainty_offsets(double r_eps_m, const GeometryConfig& geo);

double orbital_speed_mps(const GeometryConfig& geo);

}  // namespace otfs
