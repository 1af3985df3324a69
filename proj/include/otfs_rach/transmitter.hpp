#pragma once

#include <span>

#include "otfs_rach/numerics.hpp"
#include "otfs_rach/sequences.hpp"
#include "otfs_rach/zak.hpp"

namespace otfs {

struct PreambleConfig {
  int M = 139;
  int N = 4;
  double delta_f_hz = 60e3;
  int root = 1;
  int Q = 10;
  double rolloff = 0.1;
  int L_cp = 0;
  int F = 8;

  Numerology numerology() const { return Numerology{M, N, delta_f_hz}; }
  ZcRoot zc_root() const { return ZcRoot::make(root, M); }
  double critical_rate_hz() const { return M * delta_f_hz; }
  // (L_cp + 2Q + N M) T / M
  double burst_duration_s() const { return (L_cp + 2.0 * Q + static_cast<double>(N) * M) / critical_rate_hz(); }
  int burst_samples() const { return (L_cp + 2 * Q + N * M) * F; }

  // Throws DomainError naming the first invalid field.
  void validate() const;
};

struct TimeSignal {
  CVec samples;
  double sample_rate_hz = 0.0;
  int oversample_factor = 1;
  // Index of the sample aligned with the first burst symbol (transmit filter delay Q*F).
  int filter_delay = 0;
};

// Z_x[l,k] = x_u[l] in every Doppler column.
DDGrid build_dd_frame(const PreambleConfig& cfg);
DDGrid build_dd_frame(const ZcRoot& root, int N);

// Z^d[l,k] = Z[l,k] exp(-j 2 pi k q_M / N), q_M in [0, N-2].
DDGrid dual_dd_frame(const DDGrid& grid, int q_M);

// Prepends x[(n)_{MN}] for n in [-L_cp, 0).
CVec add_cp(std::span<const cplx> x, int L_cp);

// Critical-rate burst idzt(build_dd_frame(cfg)) with the CP attached.
CVec build_burst(const PreambleConfig& cfg);

// s[j] = sum_m x_c[m] taps[j - m F] on the F-oversampled grid. Output length is
// (len(x_c) + 2Q) F; sample j sits at (j - Q F) / F symbol intervals.
TimeSignal synthesize_waveform(std::span<const cplx> x_c, const Pulse& pulse, int F, double critical_rate_hz);

}  // namespace otfs
