#include "otfs_rach/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "otfs_rach/numerics.hpp"

namespace otfs {

double threshold_from_pfa(double p_fa, int M, int N) {
  if (!(p_fa > 0.0 && p_fa < 1.0)) throw DomainError("threshold_from_pfa: p_fa must lie in (0, 1)");
  if (M < 1 || N < 1) throw DomainError("threshold_from_pfa: invalid grid size");
  const double per_cell = -std::expm1(std::log1p(-p_fa) / M);
  return -2.0 / (static_cast<double>(M) * N) * std::log(per_cell);
}

double pfa_from_threshold(double r_th, int M, int N) {
  if (!(r_th >= 0.0)) throw DomainError("pfa_from_threshold: threshold must be >= 0");
  if (std::isinf(r_th)) return 0.0;
  const double tail = std::exp(-r_th * M * N / 2.0);
  if (tail >= 1.0) return 1.0;
  return -std::expm1(M * std::log1p(-tail));
}

ResolutionMode parse_resolution_mode(const std::string& s) {
  if (s == "native") return ResolutionMode::native;
  if (s == "interpolated") return ResolutionMode::interpolated;
  throw DomainError("unknown resolution mode '" + s + "' (expected native or interpolated)");
}

const char* to_string(ResolutionMode m) { return m == ResolutionMode::native ? "native" : "interpolated"; }

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::correct: return "correct";
    case Outcome::miss_no_peak: return "miss_no_peak";
    case Outcome::miss_wrong_preamble: return "miss_wrong_preamble";
    case Outcome::miss_timing: return "miss_timing";
  }
  return "unknown";
}

Detector::Detector(int M, int N, double delta_f_hz, std::vector<ZcRoot> candidates, ResolutionMode mode, int fft_size)
    : M_(M), N_(N), delta_f_hz_(delta_f_hz), candidates_(std::move(candidates)), mode_(mode) {
  if (candidates_.empty()) throw DomainError("detector: empty candidate list");
  if (M < 2 || N < 1) throw DomainError("detector: invalid grid size");
  for (const auto& c : candidates_) {
    if (c.M != M) throw DimensionError("detector: candidate length differs from M");
  }
  const std::size_t twoM = 2 * static_cast<std::size_t>(M);
  if (mode_ == ResolutionMode::native) {
    // Linear correlation of an M-sample column against the 2M-1 reference lags
    // needs at least 3M-2 points to avoid aliasing.
    const std::size_t need = 3 * static_cast<std::size_t>(M) - 2;
    P_ = fft_size > 0 ? fft_size : static_cast<int>(next_pow2(need));
    if (static_cast<std::size_t>(P_) < need) throw DimensionError("detector: fft_size below 3M-2");
    rows_ = M;
    lag_step_ = 1.0;
  } else {
    P_ = fft_size > 0 ? fft_size : 1024;
    if (static_cast<std::size_t>(P_) < twoM || P_ % 2 != 0) {
      throw DimensionError("detector: interpolated fft_size must be even and >= 2M");
    }
    lag_step_ = static_cast<double>(twoM) / P_;
    rows_ = static_cast<int>(std::ceil(M / lag_step_ - 1e-9));
  }

  ref_.resize(candidates_.size() * static_cast<std::size_t>(N));
  for (std::size_t v = 0; v < candidates_.size(); ++v) {
    for (int k = 0; k < N; ++k) {
      const CVec ext = extended_sequence(candidates_[v], k, N);
      CVec spec;
      if (mode_ == ResolutionMode::native) {
        // v[j] = ext[(j - (M-1)) mod 2M], j in [0, 2M-1)
        CVec w(twoM - 1);
        for (std::size_t j = 0; j < w.size(); ++j) {
          const long long idx = (static_cast<long long>(j) - (M - 1) + static_cast<long long>(twoM)) % static_cast<long long>(twoM);
          w[j] = ext[static_cast<std::size_t>(idx)];
        }
        spec = dft(w, static_cast<std::size_t>(P_));
      } else {
        spec = dft(ext, twoM);
      }
      for (auto& s : spec) s = std::conj(s);
      ref_[v * N + k] = std::move(spec);
    }
  }
}

DecisionGrid Detector::grid(const DDGrid& z) const {
  if (z.M != M_ || z.N != N_) throw DimensionError("decision_grid: received grid has the wrong shape");
  DecisionGrid g;
  g.M = M_;
  g.N = N_;
  g.rows = rows_;
  g.lag_step = lag_step_;
  g.delta_f_hz = delta_f_hz_;
  g.mode = mode_;
  g.candidates = candidates_;
  g.rho.assign(candidates_.size() * rows_ * N_, 0.0);

  const std::size_t twoM = 2 * static_cast<std::size_t>(M_);
  const std::size_t colP = mode_ == ResolutionMode::native ? static_cast<std::size_t>(P_) : twoM;
  std::vector<CVec> col_spec(static_cast<std::size_t>(N_));
  for (int k = 0; k < N_; ++k) col_spec[static_cast<std::size_t>(k)] = dft(z.column(k), colP);

  const double norm = 1.0 / (static_cast<double>(M_) * N_);
  const double ifft_scale = mode_ == ResolutionMode::native ? 1.0 / P_ : 1.0 / static_cast<double>(twoM);
  CVec buf(static_cast<std::size_t>(P_));
  std::vector<CVec> corr(static_cast<std::size_t>(N_), CVec(static_cast<std::size_t>(rows_)));
  CVec dop(static_cast<std::size_t>(N_));

  for (std::size_t v = 0; v < candidates_.size(); ++v) {
    for (int k = 0; k < N_; ++k) {
      const CVec& Z = col_spec[static_cast<std::size_t>(k)];
      const CVec& R = ref_[v * N_ + k];
      if (mode_ == ResolutionMode::native) {
        for (int s = 0; s < P_; ++s) buf[static_cast<std::size_t>(s)] = Z[static_cast<std::size_t>(s)] * R[static_cast<std::size_t>(s)];
        ifft_inplace_unscaled(buf);
        for (int mu = 0; mu < rows_; ++mu) {
          const int s = ((mu - (M_ - 1)) % P_ + P_) % P_;
          corr[static_cast<std::size_t>(k)][static_cast<std::size_t>(mu)] = buf[static_cast<std::size_t>(s)] * ifft_scale;
        }
      } else {
        // Band-limited interpolation of the exact 2M-periodic correlation.
        std::fill(buf.begin(), buf.end(), cplx{});
        const int Mi = M_;
        for (int f = 0; f < Mi; ++f) buf[static_cast<std::size_t>(f)] = Z[static_cast<std::size_t>(f)] * R[static_cast<std::size_t>(f)];
        const cplx nyq = Z[static_cast<std::size_t>(Mi)] * R[static_cast<std::size_t>(Mi)];
        buf[static_cast<std::size_t>(Mi)] += 0.5 * nyq;
        buf[static_cast<std::size_t>(P_ - Mi)] += 0.5 * nyq;
        for (int f = Mi + 1; f < 2 * Mi; ++f) {
          buf[static_cast<std::size_t>(P_ - (2 * Mi - f))] = Z[static_cast<std::size_t>(f)] * R[static_cast<std::size_t>(f)];
        }
        ifft_inplace_unscaled(buf);
        for (int r = 0; r < rows_; ++r) {
          corr[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)] = buf[static_cast<std::size_t>(r)] * ifft_scale;
        }
      }
    }
    // Coherent accumulation across Doppler: sum_k exp(j 2 pi k gamma / N) c_k.
    for (int r = 0; r < rows_; ++r) {
      for (int k = 0; k < N_; ++k) dop[static_cast<std::size_t>(k)] = corr[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)];
      ifft_inplace_unscaled(dop);
      for (int gam = 0; gam < N_; ++gam) {
        g.rho[g.index(static_cast<int>(v), r, gam)] = std::norm(dop[static_cast<std::size_t>(gam)] * norm);
      }
    }
  }
  return g;
}

DecisionGrid decision_grid(const DDGrid& z, const std::vector<ZcRoot>& candidates, const PreambleConfig& cfg,
                           ResolutionMode mode) {
  return Detector(cfg.M, cfg.N, cfg.delta_f_hz, candidates, mode).grid(z);
}

namespace {

DetectionDecision make_decision(const DecisionGrid& g, int v, int row, int gamma) {
  DetectionDecision d;
  d.detected = true;
  d.candidate = v;
  d.row = row;
  d.u_hat = g.candidates[static_cast<std::size_t>(v)].u;
  d.r_m_hat = row * g.lag_step;
  d.q_m_hat = gamma;
  d.peak = g.at(v, row, gamma);
  d.tau_hat_s = (d.r_m_hat + static_cast<double>(d.q_m_hat) * g.M) / (g.M * g.delta_f_hz);
  return d;
}

DetectionDecision best_in_candidate(const DecisionGrid& g, int v, double r_th) {
  double best = -1.0;
  int br = -1;
  int bg = -1;
  for (int r = 0; r < g.rows; ++r) {
    for (int gam = 0; gam < g.N; ++gam) {
      const double x = g.at(v, r, gam);
      if (x >= r_th && x > best) {
        best = x;
        br = r;
        bg = gam;
      }
    }
  }
  if (br < 0) return {};
  return make_decision(g, v, br, bg);
}

}  // namespace

DetectionDecision detect(const DecisionGrid& grid, double r_th) {
  if (!(r_th >= 0.0)) throw DomainError("detect: threshold must be >= 0");
  DetectionDecision best;
  for (int v = 0; v < grid.num_candidates(); ++v) {
    DetectionDecision d = best_in_candidate(grid, v, r_th);
    if (d.detected && (!best.detected || d.peak > best.peak)) best = d;
  }
  return best;
}

std::vector<DetectionDecision> detect_per_candidate(const DecisionGrid& grid, double r_th) {
  if (!(r_th >= 0.0)) throw DomainError("detect: threshold must be >= 0");
  std::vector<DetectionDecision> out;
  for (int v = 0; v < grid.num_candidates(); ++v) {
    DetectionDecision d = best_in_candidate(grid, v, r_th);
    if (d.detected) out.push_back(d);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const DetectionDecision& a, const DetectionDecision& b) { return a.peak > b.peak; });
  return out;
}

DetectionDecision refine_fractional(const DecisionGrid& grid, const DetectionDecision& decision) {
  if (grid.mode != ResolutionMode::native) throw DomainError("refine_fractional: requires native resolution");
  if (!decision.detected || decision.refined) return decision;
  const int M = grid.M;
  const int N = grid.N;
  const int v = decision.candidate;
  const int r = decision.row;
  const int q = decision.q_m_hat;
  const double peak = grid.at(v, r, q);

  const double left = r > 0 ? grid.at(v, r - 1, q) : grid.at(v, M - 1, (q - 1 + N) % N);
  const double right = r < M - 1 ? grid.at(v, r + 1, q) : grid.at(v, 0, (q + 1) % N);
  const bool left_close = left > 0.0 && peak / left < 1.25;
  const bool right_close = right > 0.0 && peak / right < 1.25;

  int step = 0;
  if (left_close && right_close) {
    step = right >= left ? +1 : -1;
  } else if (right_close) {
    step = +1;
  } else if (left_close) {
    step = -1;
  }
  DetectionDecision out = decision;
  out.refined = true;
  if (step == 0) return out;

  const double MN = static_cast<double>(M) * N;
  double total = r + static_cast<double>(q) * M + 0.5 * step;
  total = std::fmod(total + MN, MN);
  out.q_m_hat = static_cast<int>(std::floor(total / M));
  out.r_m_hat = total - static_cast<double>(out.q_m_hat) * M;
  out.tau_hat_s = total / (M * grid.delta_f_hz);
  return out;
}

double timing_error_samples(const DetectionDecision& d, const ChannelParams& truth) {
  const double MN = truth.num.frame_length();
  const double est = d.r_m_hat + static_cast<double>(d.q_m_hat) * truth.num.M;
  const double tru = truth.tau0_s * truth.num.delta_f_hz * truth.num.M;
  double e = std::fmod(est - tru, MN);
  if (e < -MN / 2) e += MN;
  if (e >= MN / 2) e -= MN;
  return e;
}

Outcome classify_trial(const DetectionDecision& decision, const ChannelParams& truth, int true_u) {
  if (!decision.detected) return Outcome::miss_no_peak;
  if (decision.u_hat != true_u) return Outcome::miss_wrong_preamble;
  if (std::abs(timing_error_samples(decision, truth)) > 1.0 + 1e-9) return Outcome::miss_timing;
  return Outcome::correct;
}

std::vector<Outcome> classify_users(const std::vector<DetectionDecision>& detections,
                                    const std::vector<UserTruth>& users) {
  std::vector<Outcome> out;
  out.reserve(users.size());
  for (const auto& user : users) {
    const DetectionDecision* hit = nullptr;
    for (const auto& d : detections) {
      if (d.detected && d.u_hat == user.u) {
        hit = &d;
        break;
      }
    }
    if (hit) {
      out.push_back(classify_trial(*hit, user.params, user.u));
    } else if (detections.size() < users.size()) {
      out.push_back(Outcome::miss_no_peak);
    } else {
      out.push_back(Outcome::miss_wrong_preamble);
    }
  }
  return out;
}

}  // namespace otfs
