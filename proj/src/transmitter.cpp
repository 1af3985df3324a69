#include "otfs_rach/transmitter.hpp"

#include <cmath>
#include <string>

namespace otfs {

void PreambleConfig::validate() const {
  if (!is_prime(M)) throw ConfigError("preamble.M", "must be prime (got " + std::to_string(M) + ")");
  if (N < 2) throw ConfigError("preamble.N", "must be >= 2");
  if (!(delta_f_hz > 0.0)) throw ConfigError("preamble.delta_f_hz", "must be positive");
  if (root < 1 || root > M - 1) throw ConfigError("preamble.root", "must lie in [1, M-1]");
  if (Q < 1) throw ConfigError("preamble.Q", "must be >= 1");
  if (!(rolloff >= 0.0 && rolloff <= 1.0)) throw ConfigError("preamble.rolloff", "must lie in [0, 1]");
  if (L_cp < 0) throw ConfigError("preamble.L_cp", "must be >= 0");
  if (F < 1) throw ConfigError("preamble.F", "must be >= 1");
}

DDGrid build_dd_frame(const ZcRoot& root, int N) {
  const CVec x = zc_sequence(root);
  DDGrid g(root.M, N);
  for (int l = 0; l < root.M; ++l) {
    for (int k = 0; k < N; ++k) g(l, k) = x[static_cast<std::size_t>(l)];
  }
  return g;
}

DDGrid build_dd_frame(const PreambleConfig& cfg) { return build_dd_frame(cfg.zc_root(), cfg.N); }

DDGrid dual_dd_frame(const DDGrid& grid, int q_M) {
  if (q_M < 0 || q_M > grid.N - 2) {
    throw DomainError("dual_dd_frame: q_M=" + std::to_string(q_M) + " outside [0, N-2]");
  }
  DDGrid out = grid;
  for (int k = 0; k < grid.N; ++k) {
    const cplx ph = std::polar(1.0, -kTwoPi * k * q_M / grid.N);
    for (int l = 0; l < grid.M; ++l) out(l, k) *= ph;
  }
  return out;
}

CVec add_cp(std::span<const cplx> x, int L_cp) {
  if (L_cp < 0) throw DomainError("add_cp: negative CP length");
  const auto n = static_cast<long long>(x.size());
  if (L_cp > 0 && n == 0) throw DimensionError("add_cp: empty input");
  CVec out;
  out.reserve(x.size() + static_cast<std::size_t>(L_cp));
  for (long long i = -L_cp; i < 0; ++i) out.push_back(x[static_cast<std::size_t>(((i % n) + n) % n)]);
  out.insert(out.end(), x.begin(), x.end());
  return out;
}

CVec build_burst(const PreambleConfig& cfg) {
  cfg.validate();
  return add_cp(idzt(build_dd_frame(cfg)), cfg.L_cp);
}

TimeSignal synthesize_waveform(std::span<const cplx> x_c, const Pulse& pulse, int F, double critical_rate_hz) {
  if (pulse.oversample_factor != F) throw DomainError("synthesize_waveform: pulse oversampling differs from F");
  const int Q = pulse.half_support_symbols;
  TimeSignal s;
  s.oversample_factor = F;
  s.sample_rate_hz = critical_rate_hz * F;
  s.filter_delay = Q * F;
  s.samples.assign((x_c.size() + 2 * static_cast<std::size_t>(Q)) * F, cplx{});
  const std::size_t taps = pulse.taps.size();
  for (std::size_t m = 0; m < x_c.size(); ++m) {
    const cplx v = x_c[m];
    if (v == cplx{}) continue;
    cplx* dst = s.samples.data() + m * F;
    for (std::size_t t = 0; t < taps; ++t) dst[t] += v * pulse.taps[t];
  }
  return s;
}

}  // namespace otfs
