#include "otfs_rach/dd_model.hpp"

#include <cmath>

#include "otfs_rach/sequences.hpp"

namespace otfs {
namespace {

int floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return static_cast<int>(q);
}

int mod(long long a, long long b) { return static_cast<int>(((a % b) + b) % b); }

}  // namespace

DualChannelView DualChannelView::make(const ChannelParams& p) {
  const int M = p.num.M;
  const int N = p.num.N;
  DualChannelView d;
  d.q_M = floor_div(p.a0, M);
  d.r_M = p.a0 - d.q_M * M;
  d.alpha0 = p.alpha0;
  d.k0 = p.k0;
  d.kappa0 = p.kappa0;
  d.h0_dual = p.h0 * std::polar(1.0, -kTwoPi * p.doppler_bins() * d.q_M / N);
  return d;
}

cplx spreading_tau(int a, int l, int k, int M, int N) {
  const long long d = static_cast<long long>(a) - l;
  if (mod(d, M) != 0) return {0.0, 0.0};
  const int m = mod(d / M, N);
  return std::polar(1.0 / std::sqrt(static_cast<double>(N)), -kTwoPi * m * k / N);
}

cplx spreading_nu(double b, int l, int k, int M, int N) {
  const double x = b - k;
  const cplx lead = std::polar(1.0 / std::sqrt(static_cast<double>(N)), kTwoPi * b * l / (static_cast<double>(M) * N));
  const double den = std::sin(kPi * x / N);
  if (std::abs(den) < 1e-12) {
    // x = p N: the kernel tends to N times the phase factor evaluated at the limit.
    const double p = std::round(x / N);
    const cplx ph = std::polar(1.0, kPi * (N - 1) * x / N);
    const double sign = (std::fmod(std::abs(p) * (N - 1), 2.0) == 0.0) ? 1.0 : -1.0;
    // sin(pi x)/sin(pi x / N) -> N cos(pi p N)/cos(pi p) = N (-1)^{p(N-1)}
    return lead * ph * (sign * N);
  }
  return lead * std::polar(1.0, kPi * (N - 1) * x / N) * (std::sin(kPi * x) / den);
}

cplx spreading_nu_direct(double b, int l, int k, int M, int N) {
  cplx acc{};
  for (int i = 0; i < N; ++i) acc += std::polar(1.0, kTwoPi * (b - k) * i / N);
  return acc * std::polar(1.0 / std::sqrt(static_cast<double>(N)), kTwoPi * b * l / (static_cast<double>(M) * N));
}

cplx doppler_sum_full(cplx x_ul, int l, int k, double b, int q_M, int M, int N) {
  cplx acc{};
  for (int m = 0; m < N; ++m) {
    const cplx zd = x_ul * std::polar(1.0, -kTwoPi * m * q_M / N);
    acc += zd * spreading_nu(b, l, k - m, M, N);
  }
  return acc / std::sqrt(static_cast<double>(N));
}

cplx doppler_sum_collapsed(cplx x_ul, int l, int k, double b, int q_M, int M, int N) {
  return x_ul * std::polar(1.0, kTwoPi * b * l / (static_cast<double>(M) * N)) *
         std::polar(1.0, kTwoPi * (b - k) * q_M / N);
}

DDGrid dd_output_oracle(const PreambleConfig& cfg, const ChannelParams& p, const Pulse& pulse, int L) {
  const int M = cfg.M;
  const int N = cfg.N;
  const DualChannelView dv = DualChannelView::make(p);
  const CVec beta = beta_taps(p, pulse, L, cfg.L_cp);
  const CVec xu = zc_sequence(cfg.zc_root());
  const double b = p.doppler_bins();

  // Inner Doppler sum per (q, k) by brute force: sum_m Z^d_x[q,m] Z^nu_b[q,k-m].
  DDGrid inner(M, N);
  for (int q = 0; q < M; ++q) {
    for (int k = 0; k < N; ++k) {
      cplx acc{};
      for (int m = 0; m < N; ++m) {
        const cplx zd = xu[static_cast<std::size_t>(q)] * std::polar(1.0, -kTwoPi * m * dv.q_M / N);
        acc += zd * spreading_nu(b, q, k - m, M, N);
      }
      inner(q, k) = acc;
    }
  }

  DDGrid out(M, N);
  const cplx global = std::polar(1.0, -kTwoPi * b * dv.q_M / N);
  for (int i = -L; i <= L; ++i) {
    const cplx bi = beta[static_cast<std::size_t>(i + L)];
    const int a = i + dv.r_M;
    for (int l = 0; l < M; ++l) {
      for (int k = 0; k < N; ++k) {
        cplx acc{};
        for (int q = 0; q < M; ++q) {
          const cplx zt = spreading_tau(a, l - q, k, M, N);
          if (zt == cplx{}) continue;
          acc += zt * inner(q, k);
        }
        out(l, k) += global * bi * acc;
      }
    }
  }
  return out;
}

DDGrid dd_system_equation(const PreambleConfig& cfg, const ChannelParams& p, const Pulse& pulse, int L) {
  const int M = cfg.M;
  const int N = cfg.N;
  const CVec beta = beta_taps(p, pulse, L, cfg.L_cp);
  const ZcRoot root = cfg.zc_root();
  const double b = p.doppler_bins();
  const double MN = static_cast<double>(M) * N;

  std::vector<CVec> ext(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) ext[static_cast<std::size_t>(k)] = extended_sequence(root, k, N);

  DDGrid out(M, N);
  for (int i = -L; i <= L; ++i) {
    const cplx bi = beta[static_cast<std::size_t>(i + L)];
    const long long d = static_cast<long long>(i) + p.a0;
    const int q_i = floor_div(d, M);
    const int r_i = mod(d, M);
    for (int l = 0; l < M; ++l) {
      const int idx = mod(l - r_i, 2 * M);
      const cplx dop = std::polar(1.0, kTwoPi * b * mod(l - r_i, M) / MN);
      for (int k = 0; k < N; ++k) {
        out(l, k) += bi * ext[static_cast<std::size_t>(k)][static_cast<std::size_t>(idx)] * dop *
                     std::polar(1.0, -kTwoPi * k * static_cast<double>(q_i) / N);
      }
    }
  }
  return out;
}

}  // namespace otfs
