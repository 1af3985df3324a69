#include "otfs_rach/numerics.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace otfs {
namespace {

// FFTW planning is not thread-safe, execution is. Plans are created once per
// (size, sign) under a lock and reused through the new-array execute API.
// FFTW_UNALIGNED keeps the chosen codelets independent of buffer alignment.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(n));
    fftw_plan plan = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void execute(std::span<cplx> data, int sign) {
  if (data.size() <= 1) return;
  fftw_plan plan = plan_cache().get(static_cast<int>(data.size()), sign);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
}

double srrc_value(double t, double beta) {
  if (std::abs(t) < 1e-12) return 1.0 - beta + 4.0 * beta / kPi;
  if (beta > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-12) {
    const double a = kPi / (4.0 * beta);
    return beta / std::sqrt(2.0) *
           ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
  }
  const double num = std::sin(kPi * t * (1.0 - beta)) + 4.0 * beta * t * std::cos(kPi * t * (1.0 + beta));
  const double den = kPi * t * (1.0 - (4.0 * beta * t) * (4.0 * beta * t));
  return num / den;
}

}  // namespace

void fft_inplace(std::span<cplx> data) { execute(data, FFTW_FORWARD); }
void ifft_inplace_unscaled(std::span<cplx> data) { execute(data, FFTW_BACKWARD); }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

CVec dft(std::span<const cplx> x, std::size_t P) {
  if (P == 0) throw DomainError("dft: transform size must be positive");
  if (P < x.size()) throw DimensionError("dft: transform size smaller than input length");
  CVec out(P, cplx{});
  std::copy(x.begin(), x.end(), out.begin());
  fft_inplace(out);
  return out;
}

CVec idft(std::span<const cplx> X, std::size_t P) {
  if (P == 0) throw DomainError("idft: transform size must be positive");
  if (P < X.size()) throw DimensionError("idft: transform size smaller than input length");
  CVec out(P, cplx{});
  std::copy(X.begin(), X.end(), out.begin());
  ifft_inplace_unscaled(out);
  const double s = 1.0 / static_cast<double>(P);
  for (auto& v : out) v *= s;
  return out;
}

Pulse srrc_pulse(double rolloff, int Q, int F) {
  if (!(rolloff >= 0.0 && rolloff <= 1.0)) throw DomainError("srrc_pulse: rolloff must lie in [0, 1]");
  if (Q < 1) throw DomainError("srrc_pulse: Q must be >= 1");
  if (F < 1) throw DomainError("srrc_pulse: F must be >= 1");

  Pulse p;
  p.oversample_factor = F;
  p.half_support_symbols = Q;
  p.rolloff = rolloff;
  const int half = Q * F;
  p.taps.resize(static_cast<std::size_t>(2 * half + 1));
  for (int n = -half; n <= half; ++n) {
    p.taps[static_cast<std::size_t>(n + half)] = srrc_value(static_cast<double>(n) / F, rolloff);
  }
  // Exact symmetry, then unit energy on the F-rate grid (sum taps^2 / F = 1).
  for (int n = 1; n <= half; ++n) {
    const double avg = 0.5 * (p.taps[half + n] + p.taps[half - n]);
    p.taps[half + n] = avg;
    p.taps[half - n] = avg;
  }
  double e = 0.0;
  for (double t : p.taps) e += t * t;
  const double scale = 1.0 / std::sqrt(e / F);
  for (double& t : p.taps) t *= scale;

  const int len = static_cast<int>(p.taps.size());
  p.autocorr.assign(static_cast<std::size_t>(2 * len - 1), 0.0);
  for (int d = 0; d < len; ++d) {
    double acc = 0.0;
    for (int i = d; i < len; ++i) acc += p.taps[i] * p.taps[i - d];
    acc /= F;
    p.autocorr[static_cast<std::size_t>(len - 1 + d)] = acc;
    p.autocorr[static_cast<std::size_t>(len - 1 - d)] = acc;
  }
  return p;
}

double pulse_autocorr(const Pulse& p, double lag_symbols) {
  const int F = p.oversample_factor;
  const int max_lag = 2 * p.half_support_symbols * F;
  const double pos = std::abs(lag_symbols) * F;
  if (pos >= max_lag) return 0.0;
  const int i0 = static_cast<int>(std::floor(pos));
  const double frac = pos - i0;
  const auto at = [&](int d) { return p.autocorr[static_cast<std::size_t>(max_lag + d)]; };
  if (frac == 0.0) return at(i0);
  return (1.0 - frac) * at(i0) + frac * at(i0 + 1);
}

}  // namespace otfs
