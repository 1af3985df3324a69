#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "otfs_rach/dd_model.hpp"
#include "otfs_rach/rng.hpp"
#include "otfs_rach/runner.hpp"

namespace otfs {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outputs {
  fs::path dir;
  std::vector<std::string> files;

  void write(const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    write_text_file(p.string(), text);
    files.push_back(p.string());
  }
};

json decision_json(const DetectionDecision& d) {
  if (!d.detected) return {{"detected", false}};
  return {{"detected", true},      {"u_hat", d.u_hat},     {"r_m_hat", d.r_m_hat}, {"q_m_hat", d.q_m_hat},
          {"peak", d.peak},        {"tau_hat_s", d.tau_hat_s}, {"refined", d.refined}};
}

Curve run_papr(const json& eff, RunResult& res) {
  const PreambleConfig pc = preamble_from_config(eff);
  const json& p = eff.at("papr");
  const double start = p.at("start_db").get<double>();
  const double stop = p.at("stop_db").get<double>();
  const double step = p.at("step_db").get<double>();
  if (!(step > 0.0)) throw ConfigError("papr.step_db", "must be positive");
  if (!(stop >= start)) throw ConfigError("papr.stop_db", "must be >= papr.start_db");
  if (pc.F < 4) throw ConfigError("preamble.F", "PAPR needs F >= 4 for envelope fidelity");
  std::vector<double> grid;
  const long long n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
  for (long long i = 0; i <= n; ++i) grid.push_back(start + static_cast<double>(i) * step);
  Curve c = papr_ccdf(pc, grid, parse_papr_window(p.at("window").get<std::string>()));
  res.summary = "papr: " + std::to_string(c.metadata["roots"].get<long long>()) + " roots, PAPR " +
                fmt("%.2f", c.metadata["papr_min_db"].get<double>()) + " to " +
                fmt("%.2f", c.metadata["papr_max_db"].get<double>()) + " dB";
  return c;
}

Curve run_psd(const json& eff, RunResult& res) {
  const PreambleConfig pc = preamble_from_config(eff);
  const json& p = eff.at("psd");
  PsdOptions o;
  o.span_hz = p.at("span_hz").get<double>();
  o.segment = p.at("segment").get<int>();
  o.stopband_hz = p.at("stopband_hz").get<double>();
  const double fs_hz = pc.critical_rate_hz() * pc.F;
  if (!(o.span_hz > 0.0) || o.span_hz > fs_hz) {
    throw ConfigError("psd.span_hz", "must lie in (0, F M delta_f] = (0, " + fmt("%.6g", fs_hz) + "]");
  }
  if (o.segment < 2 || o.segment % 2 != 0) throw ConfigError("psd.segment", "must be even and >= 2");
  if (!(o.stopband_hz > 0.0) || o.stopband_hz > fs_hz / 2) throw ConfigError("psd.stopband_hz", "must lie in (0, fs/2]");
  PsdResult r = psd_analysis(pc, o);
  res.summary = "psd: " + std::to_string(r.curve.size()) + " bins over " + fmt("%.4g", o.span_hz / 1e6) +
                " MHz, stopband " + fmt("%.1f", r.stopband_db) + " dB at +/-" + fmt("%.4g", o.stopband_hz / 1e6) +
                " MHz";
  return r.curve;
}

Curve run_mdp(const json& eff, const RunOptions& opt, RunResult& res) {
  const PreambleConfig pc = preamble_from_config(eff);
  const MdpConfig m = mdp_from_config(eff);
  Curve c = mdp_curve(m, pc, opt.workers);
  res.summary = "mdp: " + std::to_string(c.size()) + " SNR points, MDP " + fmt("%.4g", c.y.front()) + " at " +
                fmt("%.4g", c.x.front()) + " dB to " + fmt("%.4g", c.y.back()) + " at " + fmt("%.4g", c.x.back()) +
                " dB";
  return c;
}

Curve run_calibrate(const json& eff, const RunOptions& opt, RunResult& res) {
  const PreambleConfig pc = preamble_from_config(eff);
  FalseAlarmOptions o = calibrate_from_config(eff);
  o.workers = opt.workers;
  const FalseAlarmResult r = false_alarm_rate(pc, o);

  // Empirical false-alarm rate of the first trial set as a function of threshold.
  const double lo = 0.5 * std::min(r.threshold, r.calibrated_threshold);
  const double hi = 1.5 * std::max(r.threshold, r.calibrated_threshold);
  Curve c;
  json closed = json::array();
  const int points = 41;
  for (int i = 0; i < points; ++i) {
    const double th = lo + (hi - lo) * i / (points - 1);
    const auto k = static_cast<long long>(std::count_if(r.peaks.begin(), r.peaks.end(), [th](double p) { return p >= th; }));
    const Interval ci = wilson(k, r.trials);
    c.x.push_back(th);
    c.y.push_back(static_cast<double>(k) / static_cast<double>(r.trials));
    c.ci_low.push_back(ci.lo);
    c.ci_high.push_back(ci.hi);
    c.n_trials.push_back(r.trials);
    closed.push_back(pfa_from_threshold(th, pc.M, pc.N));
  }
  c.metadata["closed_form_pfa"] = closed;
  c.validate();
  res.report = {{"p_fa_target", o.p_fa_target},
                {"threshold", r.threshold},
                {"closed_form_threshold", r.closed_form_threshold},
                {"trials", r.trials},
                {"alarms", r.alarms},
                {"rate", r.rate},
                {"ci", {r.ci.lo, r.ci.hi}},
                {"calibrated_threshold", r.calibrated_threshold},
                {"validation_trials", r.validation_trials},
                {"validation_alarms", r.validation_alarms},
                {"validation_rate", r.validation_rate},
                {"validation_ci", {r.validation_ci.lo, r.validation_ci.hi}}};
  c.metadata["curve"] = "empirical false-alarm rate versus threshold";
  res.summary = "calibrate: threshold " + fmt("%.6g", r.threshold) + " gives empirical rate " + fmt("%.4g", r.rate) +
                " (target " + fmt("%.4g", o.p_fa_target) + "); calibrated threshold " +
                fmt("%.6g", r.calibrated_threshold) + " gives " + fmt("%.4g", r.validation_rate) + " on fresh trials";
  return c;
}

Curve run_detect_demo(const json& eff, RunResult& res) {
  const PreambleConfig base = preamble_from_config(eff);
  const json& d = eff.at("detect_demo");
  PreambleConfig pc = base;
  pc.root = d.at("root").get<int>();
  if (pc.root < 1 || pc.root > pc.M - 1) throw ConfigError("detect_demo.root", "must lie in [1, M-1]");
  const double tau = d.at("tau_s").get<double>();
  const double nu = d.at("nu_hz").get<double>();
  const double max_tau = (pc.N - 1) / pc.delta_f_hz;
  if (!(tau >= 0.0 && tau < max_tau)) {
    throw InfeasibleError("0 <= detect_demo.tau_s < (N-1)/delta_f_hz", "timing offset outside [0, (N-1)T)");
  }
  if (!(std::abs(nu) < pc.delta_f_hz / 2.0)) {
    throw InfeasibleError("|detect_demo.nu_hz| < delta_f_hz/2", "carrier frequency offset outside (-delta_f/2, delta_f/2)");
  }
  const json& det = eff.at("detector");
  const int V = det.at("num_candidates").get<int>();
  if (V < 1 || V > pc.M - 1) throw ConfigError("detector.num_candidates", "must lie in [1, M-1]");
  const double p_fa = det.at("p_fa").get<double>();
  if (!(p_fa > 0.0 && p_fa < 1.0)) throw ConfigError("detector.p_fa", "must lie in (0, 1)");
  const int L = eff.at("channel").at("L").get<int>();
  if (L < 0 || L > 2 * pc.Q) throw ConfigError("channel.L", "must lie in [0, 2Q]");
  const WrapMode wrap = eff.at("channel").at("model").get<std::string>() == "linear" ? WrapMode::linear : WrapMode::circular;
  const ResolutionMode mode = parse_resolution_mode(det.at("mode").get<std::string>());

  const auto table = root_table_from_config(eff);
  if (table && static_cast<int>(table->size()) < V) {
    throw ConfigError("detector.root_table", "holds fewer entries than detector.num_candidates");
  }
  const auto roots = preamble_root_set(pc.M, V, table);

  const bool noiseless = d.at("snr_db").is_null();
  const double snr_db = noiseless ? 0.0 : d.at("snr_db").get<double>();
  const double amp = noiseless ? 1.0 : std::sqrt(std::pow(10.0, snr_db / 10.0));
  const ChannelParams params =
      ChannelParams::make(std::polar(amp, d.at("phase_rad").get<double>()), tau, nu, pc.numerology());
  const Pulse pulse = srrc_pulse(pc.rolloff, pc.Q, pc.F);
  std::optional<std::uint64_t> noise;
  if (!noiseless) noise = stream_seed(eff.at("seed").get<std::uint64_t>(), {0});
  const ChannelOutput y =
      apply_discrete_channel(build_burst(pc), params, pulse, L > 0 ? L : 2 * pc.Q, pc.L_cp, noise, wrap);

  const double r_th = threshold_from_pfa(p_fa, pc.M, pc.N);
  const Detector detector(pc.M, pc.N, pc.delta_f_hz, roots, mode);
  const DecisionGrid g = detector.grid(dzt(y.y, pc.M, pc.N));
  const DetectionDecision raw = detect(g, r_th);
  DetectionDecision dec = raw;
  if (det.at("refine").get<bool>() && mode == ResolutionMode::native) dec = refine_fractional(g, raw);
  const Outcome outcome = classify_trial(dec, params, pc.root);
  const DualChannelView dual = DualChannelView::make(params);

  res.report = {{"truth",
                 {{"u", pc.root},
                  {"tau_s", tau},
                  {"nu_hz", nu},
                  {"snr_db", noiseless ? json(nullptr) : json(snr_db)},
                  {"a0", params.a0},
                  {"alpha0", params.alpha0},
                  {"k0", params.k0},
                  {"kappa0", params.kappa0},
                  {"r_M", dual.r_M},
                  {"q_M", dual.q_M}}},
                {"decision", decision_json(dec)},
                {"unrefined", decision_json(raw)},
                {"threshold", r_th},
                {"p_fa", p_fa},
                {"out_of_regime", y.out_of_regime},
                {"timing_error_samples", dec.detected ? json(timing_error_samples(dec, params)) : json(nullptr)},
                {"outcome", to_string(outcome)}};

  std::ostringstream t;
  t << "truth:    u=" << pc.root << " tau=" << fmt("%.6g", tau) << " s (a0=" << params.a0
    << ", alpha0=" << fmt("%.3f", std::abs(params.alpha0) < 5e-4 ? 0.0 : params.alpha0) << ", r_M=" << dual.r_M << ", q_M=" << dual.q_M
    << ") nu=" << fmt("%.6g", nu) << " Hz (k0+kappa0=" << fmt("%.4f", params.doppler_bins()) << ")"
    << (noiseless ? " noiseless" : " SNR=" + fmt("%.2f", snr_db) + " dB") << "\n";
  if (dec.detected) {
    t << "decision: u=" << dec.u_hat << " r_M=" << fmt("%.1f", dec.r_m_hat) << " q_M=" << dec.q_m_hat
      << " tau=" << fmt("%.6g", dec.tau_hat_s) << " s peak=" << fmt("%.6g", dec.peak) << "\n";
  } else {
    t << "decision: no peak above threshold\n";
  }
  t << "threshold: " << fmt("%.6g", r_th) << " (p_fa " << fmt("%.3g", p_fa) << ")\n";
  t << "outcome:  " << to_string(outcome) << "\n";
  res.report_text = t.str();

  int cand = dec.detected ? dec.candidate : 0;
  if (!dec.detected) {
    for (int v = 0; v < g.num_candidates(); ++v) {
      if (roots[static_cast<std::size_t>(v)].u == pc.root) cand = v;
    }
  }
  Curve c;
  for (int gam = 0; gam < g.N; ++gam) {
    for (int r = 0; r < g.rows; ++r) {
      const double v = g.at(cand, r, gam);
      c.x.push_back(r * g.lag_step + static_cast<double>(gam) * g.M);
      c.y.push_back(v);
      c.ci_low.push_back(v);
      c.ci_high.push_back(v);
      c.n_trials.push_back(1);
    }
  }
  c.validate();
  c.metadata["curve"] = "decision variable versus total delay index for root " +
                        std::to_string(roots[static_cast<std::size_t>(cand)].u);
  res.summary = std::string("detect-demo: ") + to_string(outcome) +
                (dec.detected ? " (u=" + std::to_string(dec.u_hat) + ", r_M=" + fmt("%.1f", dec.r_m_hat) +
                                    ", q_M=" + std::to_string(dec.q_m_hat) + ")"
                              : std::string(" (no detection)"));
  return c;
}

void run_geometry(const json& eff, RunResult& res, Curve& to, Curve& cfo) {
  const GeometryConfig geo = geometry_from_config(eff);
  const auto r_eps = eff.at("geometry").at("r_eps_m").get<std::vector<double>>();
  if (r_eps.empty()) throw ConfigError("geometry.r_eps_m", "must not be empty");
  for (std::size_t i = 0; i < r_eps.size(); ++i) {
    if (!(r_eps[i] >= 0.0)) throw ConfigError("geometry.r_eps_m", "values must be >= 0");
    if (i > 0 && !(r_eps[i] > r_eps[i - 1])) throw ConfigError("geometry.r_eps_m", "must be strictly increasing");
  }
  json pts = json::array();
  for (double r : r_eps) {
    const UncertaintyOffsets u = uncertainty_offsets(r, geo);
    for (Curve* c : {&to, &cfo}) c->x.push_back(r);
    to.y.push_back(u.to_max_s);
    cfo.y.push_back(u.cfo_max_hz);
    for (Curve* c : {&to, &cfo}) {
      c->ci_low.push_back(c->y.back());
      c->ci_high.push_back(c->y.back());
      c->n_trials.push_back(1);
    }
    pts.push_back({{"r_eps_m", r},
                   {"to_max_s", u.to_max_s},
                   {"cfo_max_hz", u.cfo_max_hz},
                   {"slant_range_diff_m", u.slant_range_diff_m},
                   {"radial_velocity_diff_mps", u.radial_velocity_diff_mps}});
  }
  to.validate();
  cfo.validate();
  to.metadata["points"] = pts;
  to.metadata["orbital_speed_mps"] = orbital_speed_mps(geo);
  res.summary = "geometry: " + std::to_string(r_eps.size()) + " radii, at " + fmt("%.6g", r_eps.back()) +
                " m: TO " + fmt("%.4g", to.y.back() * 1e6) + " us, CFO " + fmt("%.4g", cfo.y.back() / 1e3) + " kHz";
}

}  // namespace

RunResult run_config(json user, const RunOptions& opt) {
  apply_overrides(user, opt.overrides);
  json eff = effective_config(user);
  if (opt.output_dir) eff["output_dir"] = *opt.output_dir;

  RunResult res;
  res.experiment = eff.at("experiment").get<std::string>();
  res.config = eff;

  // Everything is computed before anything is written.
  Curve curve;
  Curve extra;
  const std::string& exp = res.experiment;
  if (exp == "papr") {
    curve = run_papr(eff, res);
  } else if (exp == "psd") {
    curve = run_psd(eff, res);
  } else if (exp == "mdp") {
    curve = run_mdp(eff, opt, res);
  } else if (exp == "calibrate") {
    curve = run_calibrate(eff, opt, res);
  } else if (exp == "detect-demo") {
    curve = run_detect_demo(eff, res);
  } else {
    run_geometry(eff, res, curve, extra);
  }

  Outputs out;
  out.dir = eff.at("output_dir").get<std::string>();
  std::error_code ec;
  fs::create_directories(out.dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out.dir.string() + "': " + ec.message());

  out.write(exp + ".csv", curve_to_csv(curve));
  if (exp == "geometry") out.write("geometry.cfo.csv", curve_to_csv(extra));
  if (exp == "detect-demo") out.write("detect-demo.report.json", res.report.dump(2) + "\n");

  json meta = eff;
  meta["meta"] = {{"version", OTFS_RACH_VERSION}, {"experiment", exp}, {"curve", curve.metadata}};
  if (!res.report.empty()) meta["meta"]["report"] = res.report;
  if (exp == "geometry") meta["meta"]["cfo_curve"] = extra.metadata;
  out.write(exp + ".meta.json", meta.dump(2) + "\n");

  res.files = out.files;
  res.summary += " -> " + (out.dir / (exp + ".csv")).string();
  return res;
}

RunResult run_file(const std::string& config_path, const RunOptions& opt) {
  return run_config(load_config_file(config_path), opt);
}

}  // namespace otfs
