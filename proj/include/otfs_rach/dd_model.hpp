#pragma once

#include "otfs_rach/channel.hpp"
#include "otfs_rach/transmitter.hpp"
#include "otfs_rach/zak.hpp"

namespace otfs {

// Delay split a0 = q_M M + r_M with the q_M M part moved to the transmitter.
struct DualChannelView {
  cplx h0_dual;  // h0 exp(-j 2 pi (k0 + kappa0) q_M / N)
  int r_M = 0;
  int q_M = 0;
  double alpha0 = 0.0;
  int k0 = 0;
  double kappa0 = 0.0;

  static DualChannelView make(const ChannelParams& p);
};

// Z^tau_a[l,k] = (1/sqrt N) sum_m delta[l - a + M m] exp(-j 2 pi m k / N).
// l is taken on the quasi-periodic Zak lattice, so the matching m is reduced mod N.
cplx spreading_tau(int a, int l, int k, int M, int N);

// Z^nu_b[l,k], the Dirichlet-kernel form. N-periodic in k; b - k = 0 (mod N)
// evaluates to sqrt(N) exp(j 2 pi b l / (MN)).
cplx spreading_nu(double b, int l, int k, int M, int N);

// Same quantity by the direct geometric sum; used to cross-check the closed form.
cplx spreading_nu_direct(double b, int l, int k, int M, int N);

// Left side of the Doppler collapse identity: (1/sqrt N) sum_m Z^d_x[l,m] Z^nu_b[l,k-m]
// for the dual frame built from x_u[l].
cplx doppler_sum_full(cplx x_ul, int l, int k, double b, int q_M, int M, int N);
// Right side: x_u[l] exp(j 2 pi b l / (MN)) exp(j 2 pi (b - k) q_M / N).
cplx doppler_sum_collapsed(cplx x_ul, int l, int k, double b, int q_M, int M, int N);

// Noiseless Z_y from the full dual-system double sum over (i, m, q).
DDGrid dd_output_oracle(const PreambleConfig& cfg, const ChannelParams& p, const Pulse& pulse, int L);

// Noiseless Z_y from the extended-sequence system equation, written per tap:
//   Z_y[l,k] = sum_i beta_i x_uk[(l - r_i)_{2M}] exp(j 2 pi b (l - r_i)_M / (MN)) exp(-j 2 pi k q_i / N)
// with i + a0 = q_i M + r_i. For taps satisfying 0 <= i + r_M <= M-1 this is the
// usual (r_M, q_M) form.
DDGrid dd_system_equation(const PreambleConfig& cfg, const ChannelParams& p, const Pulse& pulse, int L);

}  // namespace otfs
