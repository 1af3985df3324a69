#pragma once

#include <span>
#include <vector>

#include "otfs_rach/types.hpp"

namespace otfs {

// P-point DFT of x zero-padded to P. Unnormalized forward transform:
//   X[m] = sum_n x[n] exp(-j 2 pi m n / P)
// Throws DomainError if P == 0 and DimensionError if P < x.size().
CVec dft(std::span<const cplx> x, std::size_t P);

// P-point inverse DFT with 1/P scaling, so idft(dft(x, P), P) restores x.
CVec idft(std::span<const cplx> X, std::size_t P);

// In-place transforms of exactly data.size() points. Forward is unnormalized,
// inverse is unscaled (no 1/P); callers apply whatever scaling they need.
void fft_inplace(std::span<cplx> data);
void ifft_inplace_unscaled(std::span<cplx> data);

std::size_t next_pow2(std::size_t n);

// Truncated square-root raised cosine pulse sampled F times per symbol.
struct Pulse {
  std::vector<double> taps;         // length 2*Q*F + 1, centered on taps[Q*F]
  int oversample_factor = 1;        // F
  int half_support_symbols = 1;     // Q
  double rolloff = 0.0;
  std::vector<double> autocorr;     // R_p on the F-rate grid, lags -2QF..2QF

  int center() const { return half_support_symbols * oversample_factor; }
};

Pulse srrc_pulse(double rolloff, int Q, int F);

// R_p(lag_symbols * T/M), linear interpolation between F-rate grid points.
// Zero outside the 2Q-symbol autocorrelation support.
double pulse_autocorr(const Pulse& p, double lag_symbols);

}  // namespace otfs
