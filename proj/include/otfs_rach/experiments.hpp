#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "otfs_rach/channel.hpp"
#include "otfs_rach/detector.hpp"
#include "otfs_rach/transmitter.hpp"

namespace otfs {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval for k successes out of n (95% by default).
Interval wilson(long long k, long long n, double z = 1.959963984540054);

struct Curve {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  std::vector<long long> n_trials;
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t size() const { return x.size(); }
  // x strictly increasing, all columns the same length.
  void validate() const;
};

// Header x,y,ci_low,ci_high,n_trials; numbers printed round-trip exact.
std::string curve_to_csv(const Curve& c);
void write_text_file(const std::string& path, const std::string& text);

// Runs fn(i) for i in [0, n) on up to `workers` threads (0 = hardware concurrency).
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

// ---- PAPR ----

// preamble: average over the (M + 2Q) F samples the preamble occupies.
// burst: average over the whole (L_cp + 2Q + NM) F sample burst.
enum class PaprWindow { preamble, burst };
PaprWindow parse_papr_window(const std::string& s);
const char* to_string(PaprWindow w);

// max|s|^2 / mean|s|^2 in dB over samples [start, start + len).
double papr_db(std::span<const cplx> s, std::size_t start, std::size_t len);

// PAPR of the oversampled burst for every root u in [1, M-1].
std::vector<double> papr_values_db(const PreambleConfig& cfg, PaprWindow window = PaprWindow::preamble);

Curve papr_ccdf(const PreambleConfig& cfg, const std::vector<double>& papr_grid_db,
                PaprWindow window = PaprWindow::preamble);

// ---- PSD ----

struct PsdOptions {
  double span_hz = 60e6;
  int segment = 1024;
  double stopband_hz = 10e6;
};

struct PsdResult {
  Curve curve;                  // frequency (Hz) vs PSD (dB, peak at 0) over the span
  double integrated_power = 0;  // sum of the un-normalized PSD times the bin width
  double mean_power = 0;        // mean |s|^2 over the burst, averaged over roots
  double stopband_db = 0;       // max of the two PSD values nearest +/- stopband_hz
  double inband_mean_db = 0;    // mean over |f| <= M delta_f / 2, dB
  int segments = 0;
  int roots = 0;
};

// Welch estimate with a periodic Hann window and 50% overlap, segmented
// cyclically over the burst, averaged over every root.
PsdResult psd_analysis(const PreambleConfig& cfg, const PsdOptions& opt = {});
Curve psd(const PreambleConfig& cfg, double span_hz);

// ---- MDP ----

struct MdpConfig {
  std::vector<double> snr_db{-14, -12, -10, -8, -6, -4, -2, 0, 2};
  double cfo_hz = 0.0;
  double to_max_s = 50e-6;
  int n_users = 1;
  int trials_per_point = 2000;
  double p_fa = 1e-3;
  std::uint64_t base_seed = 1;
  int num_candidates = 64;
  std::optional<std::vector<int>> root_table;
  ResolutionMode mode = ResolutionMode::native;
  bool refine = true;
  WrapMode channel = WrapMode::circular;
  int L = 0;  // discrete channel half-width; 0 selects 2Q

  void validate(const PreambleConfig& cfg) const;
};

struct TrialRecord {
  std::vector<UserTruth> users;
  std::vector<DetectionDecision> detections;
  std::vector<Outcome> outcomes;
};

// Holds everything reusable across trials: pulse, bursts for every candidate
// root and the detector. trial() is a pure function of (snr index, trial index).
class MdpSimulator {
 public:
  MdpSimulator(const MdpConfig& mdp, const PreambleConfig& cfg);

  TrialRecord trial(std::size_t snr_index, std::size_t trial_index) const;
  const Detector& detector() const { return detector_; }
  double threshold() const { return r_th_; }

 private:
  MdpConfig mdp_;
  PreambleConfig cfg_;
  Pulse pulse_;
  int L_;
  std::vector<ZcRoot> roots_;
  std::vector<CVec> bursts_;
  Detector detector_;
  double r_th_;
};

Curve mdp_curve(const MdpConfig& mdp, const PreambleConfig& cfg, int workers = 0);

// ---- false alarm ----

struct FalseAlarmOptions {
  double p_fa_target = 1e-2;
  long long trials = 10000;
  std::uint64_t seed = 1;
  int num_candidates = 64;
  std::optional<std::vector<int>> root_table;
  ResolutionMode mode = ResolutionMode::native;
  std::optional<double> threshold;  // overrides the closed form when set
  int workers = 0;
};

struct FalseAlarmResult {
  double threshold = 0;  // threshold under test (closed form unless overridden)
  double closed_form_threshold = 0;
  long long trials = 0;
  long long alarms = 0;
  double rate = 0;
  Interval ci;
  // Threshold set on the first trial set, then checked on an independent second set.
  double calibrated_threshold = 0;
  long long validation_trials = 0;
  long long validation_alarms = 0;
  double validation_rate = 0;
  Interval validation_ci;
  std::vector<double> peaks;  // per-trial grid maximum, first trial set
};

// Largest decision-variable entry over the whole grid for one noise-only frame.
double noise_only_peak(const Detector& det, int M, int N, std::uint64_t seed);

FalseAlarmResult false_alarm_rate(const PreambleConfig& cfg, const FalseAlarmOptions& opt);

// Energy ratio of a design that needs a CP of (N-1)T in front of an N T body.
double energy_overhead_db(int N);

}  // namespace otfs
