#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "otfs_rach/numerics.hpp"
#include "otfs_rach/transmitter.hpp"

namespace otfs {

struct Offsets {
  int a0 = 0;
  double alpha0 = 0.0;  // (-0.5, 0.5]
  int k0 = 0;
  double kappa0 = 0.0;  // (-0.5, 0.5]
};

// v = n + f with integer n and f in (-0.5, 0.5]. Values within 1e-9 of a
// half-integer snap to f = +0.5.
std::pair<int, double> split_half_open(double v);

// tau0 = (a0 + alpha0) / (delta_f M), nu0 = (k0 + kappa0) delta_f / N.
Offsets decompose_offsets(double tau0_s, double nu0_hz, int M, int N, double delta_f_hz);

struct ChannelParams {
  cplx h0{1.0, 0.0};
  double tau0_s = 0.0;
  double nu0_hz = 0.0;
  int a0 = 0;
  double alpha0 = 0.0;
  int k0 = 0;
  double kappa0 = 0.0;
  Numerology num;

  static ChannelParams make(cplx h0, double tau0_s, double nu0_hz, const Numerology& num);

  double delay_bins() const { return a0 + alpha0; }
  double doppler_bins() const { return k0 + kappa0; }
  // 0 <= tau0, a0 < (N-1) M and |(k0 + kappa0) / N| < 1/2.
  bool in_detectable_regime() const;
};

// beta[i] = h0 exp(j 2 pi nu0 L_cp T/M) R_p((i - alpha0) T/M), i in [-L, L]; index i + L.
CVec beta_taps(const ChannelParams& p, const Pulse& pulse, int L, int L_cp);

// circular: the CP-stripped frame is Doppler-rotated on its own sample index and
//   delayed cyclically modulo MN (the model the DD analysis is written for).
// linear: the CP-extended burst is delayed without wrap; samples outside the
//   burst are zero. This is what the waveform path produces.
enum class WrapMode { circular, linear };

struct ChannelOutput {
  CVec y;  // length MN, CP stripped
  bool out_of_regime = false;
};

ChannelOutput apply_discrete_channel(std::span<const cplx> x_c, const ChannelParams& p, const Pulse& pulse, int L,
                                     int L_cp, std::optional<std::uint64_t> noise_seed,
                                     WrapMode wrap = WrapMode::circular);

// Adds i.i.d. CN(0, variance) samples.
void add_awgn(std::span<cplx> y, std::uint64_t seed, double variance = 1.0);

// r(t) = h0 s(t - tau0) exp(j 2 pi nu0 (t - tau0)) + w(t) on the oversampled grid.
// Noise is CN(0, F) per sample so matched-filter outputs have unit variance.
TimeSignal apply_waveform_channel(const TimeSignal& s, const ChannelParams& p,
                                  std::optional<std::uint64_t> noise_seed);

// y[n] = (1/F) sum_j r[j] taps[j - (n + L_cp) F], n in [0, frame_len).
CVec matched_filter_and_sample(const TimeSignal& r, const Pulse& pulse, int L_cp, int frame_len);

// |h0|^2 = G_ue G_sat / (P_L k_B T_sys B)
double link_budget_snr(double g_ue_db, double g_sat_db, double path_loss_db, double t_sys_kelvin,
                       double bandwidth_hz);

}  // namespace otfs
