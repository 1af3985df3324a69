#include "otfs_rach/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "otfs_rach/numerics.hpp"
#include "otfs_rach/rng.hpp"

namespace otfs {

Interval wilson(long long k, long long n, double z) {
  if (n <= 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double den = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / den;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / den;
  // The bounds are exactly 0 and 1 at the edges; rounding would otherwise leave ~1e-18.
  return {k == 0 ? 0.0 : std::max(0.0, center - half), k == n ? 1.0 : std::min(1.0, center + half)};
}

void Curve::validate() const {
  const std::size_t n = x.size();
  if (y.size() != n || ci_low.size() != n || ci_high.size() != n || n_trials.size() != n) {
    throw DimensionError("curve columns have different lengths");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x[i] > x[i - 1])) throw DomainError("curve x values must be strictly increasing");
  }
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string curve_to_csv(const Curve& c) {
  c.validate();
  std::string out = "x,y,ci_low,ci_high,n_trials\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    out += fmt_double(c.x[i]) + ',' + fmt_double(c.y[i]) + ',' + fmt_double(c.ci_low[i]) + ',' +
           fmt_double(c.ci_high[i]) + ',' + std::to_string(c.n_trials[i]) + '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << text;
  if (!f) throw IoError("write failed for '" + path + "'");
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t w = workers > 0 ? static_cast<std::size_t>(workers) : std::max(1u, std::thread::hardware_concurrency());
  w = std::min(w, n);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(err_mutex);
        if (!err) err = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t t = 0; t < w; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

// ---- PAPR ----

PaprWindow parse_papr_window(const std::string& s) {
  if (s == "preamble") return PaprWindow::preamble;
  if (s == "burst") return PaprWindow::burst;
  throw DomainError("unknown PAPR window '" + s + "' (expected preamble or burst)");
}

const char* to_string(PaprWindow w) { return w == PaprWindow::preamble ? "preamble" : "burst"; }

double papr_db(std::span<const cplx> s, std::size_t start, std::size_t len) {
  if (len == 0 || start + len > s.size()) throw DimensionError("papr_db: window outside the signal");
  double peak = 0.0;
  double sum = 0.0;
  for (std::size_t j = start; j < start + len; ++j) {
    const double p = std::norm(s[j]);
    peak = std::max(peak, p);
    sum += p;
  }
  if (sum == 0.0) throw DomainError("papr_db: zero-power window");
  return 10.0 * std::log10(peak / (sum / static_cast<double>(len)));
}

std::vector<double> papr_values_db(const PreambleConfig& cfg, PaprWindow window) {
  cfg.validate();
  if (cfg.F < 4) throw DomainError("papr: oversampling factor F must be >= 4");
  const Pulse pulse = srrc_pulse(cfg.rolloff, cfg.Q, cfg.F);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(cfg.M - 1));
  for (int u = 1; u < cfg.M; ++u) {
    PreambleConfig c = cfg;
    c.root = u;
    const CVec xc = build_burst(c);
    const TimeSignal s = synthesize_waveform(xc, pulse, cfg.F, cfg.critical_rate_hz());
    std::size_t start = 0;
    std::size_t len = s.samples.size();
    if (window == PaprWindow::preamble) {
      start = static_cast<std::size_t>(cfg.L_cp) * cfg.F;
      len = static_cast<std::size_t>(cfg.M + 2 * cfg.Q) * cfg.F;
    }
    out.push_back(papr_db(s.samples, start, len));
  }
  return out;
}

Curve papr_ccdf(const PreambleConfig& cfg, const std::vector<double>& papr_grid_db, PaprWindow window) {
  const std::vector<double> v = papr_values_db(cfg, window);
  Curve c;
  const auto n = static_cast<long long>(v.size());
  for (double g : papr_grid_db) {
    const auto k = static_cast<long long>(std::count_if(v.begin(), v.end(), [g](double p) { return p > g; }));
    const Interval ci = wilson(k, n);
    c.x.push_back(g);
    c.y.push_back(static_cast<double>(k) / static_cast<double>(n));
    c.ci_low.push_back(ci.lo);
    c.ci_high.push_back(ci.hi);
    c.n_trials.push_back(n);
  }
  c.validate();
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  c.metadata["papr_min_db"] = *mn;
  c.metadata["papr_max_db"] = *mx;
  c.metadata["roots"] = n;
  c.metadata["window"] = to_string(window);
  c.metadata["papr_db"] = v;
  return c;
}

// ---- PSD ----

PsdResult psd_analysis(const PreambleConfig& cfg, const PsdOptions& opt) {
  cfg.validate();
  const double fs = cfg.critical_rate_hz() * cfg.F;
  if (!(opt.span_hz > 0.0) || opt.span_hz > fs) {
    throw DomainError("psd: span exceeds the simulated sample rate F M delta_f");
  }
  if (opt.segment < 2 || opt.segment % 2 != 0) throw DomainError("psd: segment length must be even and >= 2");
  const Pulse pulse = srrc_pulse(cfg.rolloff, cfg.Q, cfg.F);
  const int Lseg = opt.segment;
  const int hop = Lseg / 2;

  std::vector<double> w(static_cast<std::size_t>(Lseg));
  double wsum2 = 0.0;
  for (int n = 0; n < Lseg; ++n) {
    const double s = std::sin(kPi * n / Lseg);
    w[static_cast<std::size_t>(n)] = s * s;
    wsum2 += s * s * s * s;
  }

  std::vector<double> acc(static_cast<std::size_t>(Lseg), 0.0);
  double mean_power = 0.0;
  int segments = 0;
  int roots = 0;
  CVec buf(static_cast<std::size_t>(Lseg));
  for (int u = 1; u < cfg.M; ++u) {
    PreambleConfig c = cfg;
    c.root = u;
    const TimeSignal s = synthesize_waveform(build_burst(c), pulse, cfg.F, cfg.critical_rate_hz());
    const std::size_t Ls = s.samples.size();
    mean_power += energy(s.samples) / static_cast<double>(Ls);
    const int nseg = std::max<int>(1, static_cast<int>(Ls / static_cast<std::size_t>(hop)));
    for (int g = 0; g < nseg; ++g) {
      const std::size_t start = static_cast<std::size_t>(g) * hop;
      for (int n = 0; n < Lseg; ++n) {
        buf[static_cast<std::size_t>(n)] = w[static_cast<std::size_t>(n)] * s.samples[(start + n) % Ls];
      }
      fft_inplace(buf);
      for (int k = 0; k < Lseg; ++k) acc[static_cast<std::size_t>(k)] += std::norm(buf[static_cast<std::size_t>(k)]);
    }
    segments = nseg;
    ++roots;
  }
  const double scale = 1.0 / (fs * wsum2 * segments * roots);
  for (auto& a : acc) a *= scale;
  mean_power /= roots;

  // Reorder to increasing frequency.
  const double df = fs / Lseg;
  std::vector<double> freq(static_cast<std::size_t>(Lseg));
  std::vector<double> P(static_cast<std::size_t>(Lseg));
  for (int j = 0; j < Lseg; ++j) {
    const int k = (j + Lseg / 2) % Lseg;
    freq[static_cast<std::size_t>(j)] = (j - Lseg / 2) * df;
    P[static_cast<std::size_t>(j)] = acc[static_cast<std::size_t>(k)];
  }
  PsdResult r;
  r.segments = segments;
  r.roots = roots;
  r.mean_power = mean_power;
  double integrated = 0.0;
  for (double p : P) integrated += p * df;
  r.integrated_power = integrated;
  const double peak = *std::max_element(P.begin(), P.end());
  const auto to_db = [peak](double p) { return 10.0 * std::log10(std::max(p, 1e-300) / peak); };

  const auto nearest = [&](double f) {
    const long long j = std::llround(f / df) + Lseg / 2;
    return static_cast<std::size_t>(std::clamp<long long>(j, 0, Lseg - 1));
  };
  r.stopband_db = std::max(to_db(P[nearest(opt.stopband_hz)]), to_db(P[nearest(-opt.stopband_hz)]));
  const double half_bw = cfg.critical_rate_hz() / 2.0;
  double inband = 0.0;
  int nin = 0;
  for (int j = 0; j < Lseg; ++j) {
    if (std::abs(freq[static_cast<std::size_t>(j)]) <= half_bw) {
      inband += P[static_cast<std::size_t>(j)];
      ++nin;
    }
  }
  r.inband_mean_db = to_db(inband / std::max(nin, 1));

  const long long n_avg = static_cast<long long>(segments) * roots;
  for (int j = 0; j < Lseg; ++j) {
    const double f = freq[static_cast<std::size_t>(j)];
    if (std::abs(f) > opt.span_hz / 2.0 + 1e-9) continue;
    const double d = to_db(P[static_cast<std::size_t>(j)]);
    r.curve.x.push_back(f);
    r.curve.y.push_back(d);
    r.curve.ci_low.push_back(d);
    r.curve.ci_high.push_back(d);
    r.curve.n_trials.push_back(n_avg);
  }
  r.curve.validate();
  r.curve.metadata["welch"] = {{"segment", Lseg}, {"window", "hann"}, {"overlap", 0.5},
                               {"segmentation", "cyclic"}, {"segments_per_root", segments}};
  r.curve.metadata["sample_rate_hz"] = fs;
  r.curve.metadata["roots"] = roots;
  r.curve.metadata["integrated_power"] = r.integrated_power;
  r.curve.metadata["mean_power"] = r.mean_power;
  r.curve.metadata["stopband_hz"] = opt.stopband_hz;
  r.curve.metadata["stopband_db"] = r.stopband_db;
  r.curve.metadata["inband_mean_db"] = r.inband_mean_db;
  return r;
}

Curve psd(const PreambleConfig& cfg, double span_hz) {
  PsdOptions o;
  o.span_hz = span_hz;
  return psd_analysis(cfg, o).curve;
}

// ---- MDP ----

void MdpConfig::validate(const PreambleConfig& cfg) const {
  if (snr_db.empty()) throw ConfigError("mdp.snr_db", "must not be empty");
  for (std::size_t i = 1; i < snr_db.size(); ++i) {
    if (!(snr_db[i] > snr_db[i - 1])) throw ConfigError("mdp.snr_db", "must be strictly increasing");
  }
  if (trials_per_point < 1) throw ConfigError("mdp.trials_per_point", "must be >= 1");
  if (num_candidates < 1 || num_candidates > cfg.M - 1) {
    throw ConfigError("mdp.num_candidates", "must lie in [1, M-1]");
  }
  if (n_users < 1 || n_users > num_candidates) throw ConfigError("mdp.n_users", "must lie in [1, num_candidates]");
  if (!(p_fa > 0.0 && p_fa < 1.0)) throw ConfigError("mdp.p_fa", "must lie in (0, 1)");
  if (L < 0 || L > 2 * cfg.Q) throw ConfigError("mdp.L", "must lie in [0, 2Q]");
  if (!(to_max_s >= 0.0)) throw ConfigError("mdp.to_max_s", "must be >= 0");
  const double max_delay = (cfg.N - 1) / cfg.delta_f_hz;
  if (to_max_s > max_delay * (1.0 + 1e-12)) {
    throw InfeasibleError("mdp.to_max_s <= (N-1)/delta_f_hz", "timing offset range exceeds (N-1)T");
  }
  if (!(std::abs(cfo_hz) < cfg.delta_f_hz / 2.0)) {
    throw InfeasibleError("|mdp.cfo_hz| < delta_f_hz/2", "carrier frequency offset outside (-delta_f/2, delta_f/2)");
  }
}

namespace {
constexpr std::uint64_t kRootStream = 0x524F4F54ULL;
constexpr std::uint64_t kNoiseStream = 0x4E4F495345ULL;
}  // namespace

MdpSimulator::MdpSimulator(const MdpConfig& mdp, const PreambleConfig& cfg)
    : mdp_(mdp),
      cfg_(cfg),
      pulse_(srrc_pulse(cfg.rolloff, cfg.Q, cfg.F)),
      L_(mdp.L > 0 ? mdp.L : 2 * cfg.Q),
      roots_(preamble_root_set(cfg.M, mdp.num_candidates, mdp.root_table)),
      detector_(cfg.M, cfg.N, cfg.delta_f_hz, roots_, mdp.mode),
      r_th_(threshold_from_pfa(mdp.p_fa, cfg.M, cfg.N)) {
  cfg_.validate();
  mdp_.validate(cfg_);
  for (const auto& r : roots_) {
    PreambleConfig c = cfg_;
    c.root = r.u;
    bursts_.push_back(build_burst(c));
  }
}

TrialRecord MdpSimulator::trial(std::size_t snr_index, std::size_t trial_index) const {
  const Numerology num = cfg_.numerology();
  const int MN = num.frame_length();
  const double snr = std::pow(10.0, mdp_.snr_db.at(snr_index) / 10.0);
  const std::uint64_t si = snr_index;
  const std::uint64_t ti = trial_index;

  // Distinct roots; the first user's draw does not depend on n_users.
  Rng root_rng(stream_seed(mdp_.base_seed, {si, ti, kRootStream}));
  std::vector<int> picked;
  std::vector<int> pool(roots_.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<int>(i);
  for (int j = 0; j < mdp_.n_users; ++j) {
    const int idx = root_rng.uniform_int(0, static_cast<int>(pool.size()) - 1);
    picked.push_back(pool[static_cast<std::size_t>(idx)]);
    pool.erase(pool.begin() + idx);
  }

  TrialRecord rec;
  CVec y(static_cast<std::size_t>(MN), cplx{});
  for (int j = 0; j < mdp_.n_users; ++j) {
    Rng rng(stream_seed(mdp_.base_seed, {si, ti, static_cast<std::uint64_t>(j)}));
    const double tau = rng.uniform(0.0, mdp_.to_max_s);
    const double phase = rng.uniform(0.0, kTwoPi);
    const cplx h0 = std::polar(std::sqrt(snr), phase);
    UserTruth ut;
    ut.u = roots_[static_cast<std::size_t>(picked[static_cast<std::size_t>(j)])].u;
    ut.params = ChannelParams::make(h0, tau, mdp_.cfo_hz, num);
    const ChannelOutput o = apply_discrete_channel(bursts_[static_cast<std::size_t>(picked[static_cast<std::size_t>(j)])],
                                                   ut.params, pulse_, L_, cfg_.L_cp, std::nullopt, mdp_.channel);
    for (int n = 0; n < MN; ++n) y[static_cast<std::size_t>(n)] += o.y[static_cast<std::size_t>(n)];
    rec.users.push_back(ut);
  }
  add_awgn(y, stream_seed(mdp_.base_seed, {si, ti, kNoiseStream}), 1.0);

  const DecisionGrid g = detector_.grid(dzt(y, cfg_.M, cfg_.N));
  std::vector<DetectionDecision> dets = detect_per_candidate(g, r_th_);
  if (dets.size() > static_cast<std::size_t>(mdp_.n_users)) dets.resize(static_cast<std::size_t>(mdp_.n_users));
  if (mdp_.refine && mdp_.mode == ResolutionMode::native) {
    for (auto& d : dets) d = refine_fractional(g, d);
  }
  rec.outcomes = classify_users(dets, rec.users);
  rec.detections = std::move(dets);
  return rec;
}

Curve mdp_curve(const MdpConfig& mdp, const PreambleConfig& cfg, int workers) {
  const MdpSimulator sim(mdp, cfg);
  const std::size_t S = mdp.snr_db.size();
  const std::size_t T = static_cast<std::size_t>(mdp.trials_per_point);
  const std::size_t U = static_cast<std::size_t>(mdp.n_users);
  std::vector<Outcome> outcomes(S * T * U, Outcome::correct);
  parallel_for(S * T, workers, [&](std::size_t idx) {
    const TrialRecord r = sim.trial(idx / T, idx % T);
    for (std::size_t j = 0; j < U; ++j) outcomes[idx * U + j] = r.outcomes[j];
  });

  Curve c;
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t s = 0; s < S; ++s) {
    long long counts[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < T * U; ++i) ++counts[static_cast<int>(outcomes[s * T * U + i])];
    const long long n = static_cast<long long>(T * U);
    const long long miss = n - counts[0];
    const Interval ci = wilson(miss, n);
    const double y = static_cast<double>(miss) / static_cast<double>(n);
    c.x.push_back(mdp.snr_db[s]);
    c.y.push_back(y);
    c.ci_low.push_back(ci.lo);
    c.ci_high.push_back(ci.hi);
    c.n_trials.push_back(n);
    const double half = 0.5 * (ci.hi - ci.lo);
    points.push_back({{"snr_db", mdp.snr_db[s]},
                      {"outcomes", static_cast<long long>(n)},
                      {"correct", counts[0]},
                      {"miss_no_peak", counts[1]},
                      {"miss_wrong_preamble", counts[2]},
                      {"miss_timing", counts[3]},
                      {"wilson_half_width", half},
                      {"low_confidence", half > y / 2.0}});
  }
  c.validate();
  c.metadata["points"] = points;
  c.metadata["threshold"] = sim.threshold();
  c.metadata["p_fa"] = mdp.p_fa;
  return c;
}

// ---- false alarm ----

double noise_only_peak(const Detector& det, int M, int N, std::uint64_t seed) {
  CVec y(static_cast<std::size_t>(M) * N, cplx{});
  add_awgn(y, seed, 1.0);
  const DecisionGrid g = det.grid(dzt(y, M, N));
  return *std::max_element(g.rho.begin(), g.rho.end());
}

FalseAlarmResult false_alarm_rate(const PreambleConfig& cfg, const FalseAlarmOptions& opt) {
  cfg.validate();
  if (!(opt.p_fa_target > 0.0 && opt.p_fa_target < 1.0)) throw DomainError("false_alarm_rate: target outside (0, 1)");
  if (static_cast<double>(opt.trials) < 10.0 / opt.p_fa_target) {
    throw DomainError("false_alarm_rate: trials must be at least 10 / p_fa_target");
  }
  const auto roots = preamble_root_set(cfg.M, opt.num_candidates, opt.root_table);
  const Detector det(cfg.M, cfg.N, cfg.delta_f_hz, roots, opt.mode);

  FalseAlarmResult r;
  r.closed_form_threshold = threshold_from_pfa(opt.p_fa_target, cfg.M, cfg.N);
  r.threshold = opt.threshold.value_or(r.closed_form_threshold);
  if (!(r.threshold >= 0.0)) throw DomainError("false_alarm_rate: threshold must be >= 0");

  const std::size_t n = static_cast<std::size_t>(opt.trials);
  std::vector<double> peaks(2 * n);
  parallel_for(2 * n, opt.workers, [&](std::size_t i) {
    peaks[i] = noise_only_peak(det, cfg.M, cfg.N, stream_seed(opt.seed, {i / n, i % n}));
  });
  const std::vector<double> first(peaks.begin(), peaks.begin() + static_cast<std::ptrdiff_t>(n));
  const std::vector<double> second(peaks.begin() + static_cast<std::ptrdiff_t>(n), peaks.end());

  r.trials = opt.trials;
  r.alarms = std::count_if(first.begin(), first.end(), [&](double p) { return p >= r.threshold; });
  r.rate = static_cast<double>(r.alarms) / static_cast<double>(r.trials);
  r.ci = wilson(r.alarms, r.trials);

  // Threshold halfway between the k-th and (k+1)-th largest peaks, k = round(p n).
  std::vector<double> sorted = first;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::size_t k = static_cast<std::size_t>(std::llround(opt.p_fa_target * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n);
  r.calibrated_threshold = k < n ? 0.5 * (sorted[k - 1] + sorted[k]) : 0.5 * sorted[n - 1];

  r.validation_trials = opt.trials;
  r.validation_alarms = std::count_if(second.begin(), second.end(), [&](double p) { return p >= r.calibrated_threshold; });
  r.validation_rate = static_cast<double>(r.validation_alarms) / static_cast<double>(r.validation_trials);
  r.validation_ci = wilson(r.validation_alarms, r.validation_trials);
  r.peaks = first;
  return r;
}

double energy_overhead_db(int N) {
  if (N < 1) throw DomainError("energy_overhead_db: N must be >= 1");
  return 10.0 * std::log10(1.0 + static_cast<double>(N - 1) / N);
}

}  // namespace otfs
