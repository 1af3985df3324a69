#include "otfs_rach/channel.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "otfs_rach/rng.hpp"

namespace otfs {

std::pair<int, double> split_half_open(double v) {
  int n = static_cast<int>(std::ceil(v - 0.5));
  double f = v - n;
  if (f <= -0.5 + 1e-9) {
    n -= 1;
    f = std::min(v - n, 0.5);
  }
  return {n, f};
}

Offsets decompose_offsets(double tau0_s, double nu0_hz, int M, int N, double delta_f_hz) {
  if (M < 1 || N < 1 || !(delta_f_hz > 0.0)) throw DomainError("decompose_offsets: invalid numerology");
  Offsets o;
  std::tie(o.a0, o.alpha0) = split_half_open(tau0_s * delta_f_hz * M);
  std::tie(o.k0, o.kappa0) = split_half_open(nu0_hz * N / delta_f_hz);
  return o;
}

ChannelParams ChannelParams::make(cplx h0, double tau0_s, double nu0_hz, const Numerology& num) {
  ChannelParams p;
  p.h0 = h0;
  p.tau0_s = tau0_s;
  p.nu0_hz = nu0_hz;
  p.num = num;
  const Offsets o = decompose_offsets(tau0_s, nu0_hz, num.M, num.N, num.delta_f_hz);
  p.a0 = o.a0;
  p.alpha0 = o.alpha0;
  p.k0 = o.k0;
  p.kappa0 = o.kappa0;
  return p;
}

bool ChannelParams::in_detectable_regime() const {
  return tau0_s >= 0.0 && a0 < (num.N - 1) * num.M && std::abs(doppler_bins() / num.N) < 0.5;
}

CVec beta_taps(const ChannelParams& p, const Pulse& pulse, int L, int L_cp) {
  if (L < 0) throw DomainError("beta_taps: L must be >= 0");
  if (L > 2 * pulse.half_support_symbols) throw DomainError("beta_taps: L exceeds the autocorrelation support 2Q");
  const int MN = p.num.frame_length();
  const cplx g = p.h0 * std::polar(1.0, kTwoPi * p.doppler_bins() * L_cp / MN);
  CVec beta(static_cast<std::size_t>(2 * L + 1));
  for (int i = -L; i <= L; ++i) beta[static_cast<std::size_t>(i + L)] = g * pulse_autocorr(pulse, i - p.alpha0);
  return beta;
}

void add_awgn(std::span<cplx> y, std::uint64_t seed, double variance) {
  Rng rng(seed);
  for (auto& v : y) v += rng.cnormal(variance);
}

ChannelOutput apply_discrete_channel(std::span<const cplx> x_c, const ChannelParams& p, const Pulse& pulse, int L,
                                     int L_cp, std::optional<std::uint64_t> noise_seed, WrapMode wrap) {
  const int MN = p.num.frame_length();
  if (L_cp < 0) throw DomainError("apply_discrete_channel: negative CP length");
  if (x_c.size() != static_cast<std::size_t>(MN + L_cp)) {
    throw DimensionError("apply_discrete_channel: burst length must be MN + L_cp");
  }
  const CVec beta = beta_taps(p, pulse, L, L_cp);
  const double b = p.doppler_bins();

  ChannelOutput out;
  out.out_of_regime = !p.in_detectable_regime();
  out.y.assign(static_cast<std::size_t>(MN), cplx{});

  // Doppler ramp on the transmit sample index; exp(j 2 pi b m / MN) for m in [-(MN), 2 MN).
  CVec ramp(static_cast<std::size_t>(3 * MN));
  for (int m = -MN; m < 2 * MN; ++m) ramp[static_cast<std::size_t>(m + MN)] = std::polar(1.0, kTwoPi * b * m / MN);

  if (wrap == WrapMode::circular) {
    CVec g(static_cast<std::size_t>(MN));
    for (int m = 0; m < MN; ++m) {
      g[static_cast<std::size_t>(m)] = x_c[static_cast<std::size_t>(m + L_cp)] * ramp[static_cast<std::size_t>(m + MN)];
    }
    for (int i = -L; i <= L; ++i) {
      const cplx bi = beta[static_cast<std::size_t>(i + L)];
      const long long shift = ((static_cast<long long>(i) + p.a0) % MN + MN) % MN;
      for (int n = 0; n < MN; ++n) {
        const long long src = (n - shift + MN) % MN;
        out.y[static_cast<std::size_t>(n)] += bi * g[static_cast<std::size_t>(src)];
      }
    }
  } else {
    const long long len = static_cast<long long>(x_c.size());
    for (int i = -L; i <= L; ++i) {
      const cplx bi = beta[static_cast<std::size_t>(i + L)];
      for (int n = 0; n < MN; ++n) {
        const long long m = static_cast<long long>(n) - i - p.a0;  // index relative to the CP end
        const long long idx = m + L_cp;
        if (idx < 0 || idx >= len) continue;
        const cplx ph = (m >= -MN && m < 2 * MN) ? ramp[static_cast<std::size_t>(m + MN)]
                                                : std::polar(1.0, kTwoPi * b * static_cast<double>(m) / MN);
        out.y[static_cast<std::size_t>(n)] += bi * x_c[static_cast<std::size_t>(idx)] * ph;
      }
    }
  }
  if (noise_seed) add_awgn(out.y, *noise_seed, 1.0);
  return out;
}

TimeSignal apply_waveform_channel(const TimeSignal& s, const ChannelParams& p, std::optional<std::uint64_t> noise_seed) {
  const int F = s.oversample_factor;
  TimeSignal r = s;
  const std::size_t len = s.samples.size();
  const double D = p.tau0_s * s.sample_rate_hz;  // delay in oversampled samples
  const double Dfloor = std::floor(D);
  double frac = D - Dfloor;
  long long Di = static_cast<long long>(Dfloor);
  if (frac > 1.0 - 1e-12) {
    frac = 0.0;
    Di += 1;
  } else if (frac < 1e-12) {
    frac = 0.0;
  }
  const auto at = [&](long long j) -> cplx {
    return (j >= 0 && j < static_cast<long long>(len)) ? s.samples[static_cast<std::size_t>(j)] : cplx{};
  };
  for (std::size_t j = 0; j < len; ++j) {
    const long long src = static_cast<long long>(j) - Di;
    cplx v = at(src);
    if (frac != 0.0) v = (1.0 - frac) * at(src) + frac * at(src - 1);
    const double t = (static_cast<double>(j) - s.filter_delay) / s.sample_rate_hz;
    r.samples[j] = p.h0 * v * std::polar(1.0, kTwoPi * p.nu0_hz * (t - p.tau0_s));
  }
  if (noise_seed) add_awgn(r.samples, *noise_seed, static_cast<double>(F));
  return r;
}

CVec matched_filter_and_sample(const TimeSignal& r, const Pulse& pulse, int L_cp, int frame_len) {
  const int F = pulse.oversample_factor;
  if (r.oversample_factor != F) throw DomainError("matched_filter_and_sample: oversampling mismatch");
  const std::size_t taps = pulse.taps.size();
  CVec y(static_cast<std::size_t>(frame_len), cplx{});
  for (int n = 0; n < frame_len; ++n) {
    const std::size_t start = static_cast<std::size_t>(n + L_cp) * F;
    cplx acc{};
    for (std::size_t t = 0; t < taps && start + t < r.samples.size(); ++t) acc += r.samples[start + t] * pulse.taps[t];
    y[static_cast<std::size_t>(n)] = acc / static_cast<double>(F);
  }
  return y;
}

double link_budget_snr(double g_ue_db, double g_sat_db, double path_loss_db, double t_sys_kelvin,
                       double bandwidth_hz) {
  if (!(t_sys_kelvin > 0.0)) throw DomainError("link_budget_snr: system temperature must be positive");
  if (!(bandwidth_hz > 0.0)) throw DomainError("link_budget_snr: bandwidth must be positive");
  const double gain = std::pow(10.0, (g_ue_db + g_sat_db - path_loss_db) / 10.0);
  return gain / (kBoltzmann * t_sys_kelvin * bandwidth_hz);
}

}  // namespace otfs
