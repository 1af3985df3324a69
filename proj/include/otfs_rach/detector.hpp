#pragma once

#include <string>
#include <vector>

#include "otfs_rach/channel.hpp"
#include "otfs_rach/sequences.hpp"
#include "otfs_rach/transmitter.hpp"
#include "otfs_rach/zak.hpp"

namespace otfs {

// r_th = -(2/(MN)) ln(1 - (1 - p_fa)^(1/M)) and its inverse
// p_fa = 1 - (1 - exp(-r_th MN / 2))^M.
double threshold_from_pfa(double p_fa, int M, int N);
double pfa_from_threshold(double r_th, int M, int N);

enum class ResolutionMode { native, interpolated };

ResolutionMode parse_resolution_mode(const std::string& s);
const char* to_string(ResolutionMode m);

// rho[v][row][gamma], row r corresponding to the delay lag r * lag_step samples.
struct DecisionGrid {
  int M = 0;
  int N = 0;
  int rows = 0;
  double lag_step = 1.0;
  double delta_f_hz = 0.0;
  ResolutionMode mode = ResolutionMode::native;
  std::vector<ZcRoot> candidates;
  std::vector<double> rho;

  int num_candidates() const { return static_cast<int>(candidates.size()); }
  std::size_t index(int v, int row, int gamma) const {
    return (static_cast<std::size_t>(v) * rows + row) * N + gamma;
  }
  double at(int v, int row, int gamma) const { return rho[index(v, row, gamma)]; }
};

struct DetectionDecision {
  bool detected = false;
  int u_hat = 0;
  double r_m_hat = 0.0;
  int q_m_hat = 0;
  double peak = 0.0;
  double tau_hat_s = 0.0;
  // Grid coordinates of the peak.
  int candidate = -1;
  int row = -1;
  bool refined = false;
};

// Reusable decision-variable engine: reference spectra are computed once per
// (candidate, Doppler column) and shared by every call to grid().
class Detector {
 public:
  // fft_size 0 selects the default: next power of two >= 3M-2 (native) or 1024 (interpolated).
  Detector(int M, int N, double delta_f_hz, std::vector<ZcRoot> candidates,
           ResolutionMode mode = ResolutionMode::native, int fft_size = 0);

  DecisionGrid grid(const DDGrid& z) const;

  int fft_size() const { return P_; }
  int M() const { return M_; }
  int N() const { return N_; }
  ResolutionMode mode() const { return mode_; }
  const std::vector<ZcRoot>& candidates() const { return candidates_; }

 private:
  int M_;
  int N_;
  double delta_f_hz_;
  std::vector<ZcRoot> candidates_;
  ResolutionMode mode_;
  int P_;
  int rows_;
  double lag_step_;
  std::vector<CVec> ref_;  // [v * N + k], conjugated spectra
};

DecisionGrid decision_grid(const DDGrid& z, const std::vector<ZcRoot>& candidates, const PreambleConfig& cfg,
                           ResolutionMode mode = ResolutionMode::native);

// Argmax over the entries >= r_th; ties go to lowest candidate, then row, then gamma.
DetectionDecision detect(const DecisionGrid& grid, double r_th);

// Best entry >= r_th for each candidate separately, strongest first.
std::vector<DetectionDecision> detect_per_candidate(const DecisionGrid& grid, double r_th);

// Half-sample step toward a delay neighbour whose power is within a factor 1.25
// of the peak. Neighbours are delay-adjacent: the left neighbour of (0, gamma) is
// (M-1, gamma-1) and the right neighbour of (M-1, gamma) is (0, gamma+1), mod N.
DetectionDecision refine_fractional(const DecisionGrid& grid, const DetectionDecision& decision);

enum class Outcome { correct, miss_no_peak, miss_wrong_preamble, miss_timing };
const char* to_string(Outcome o);

// Signed estimate-minus-truth delay in critical-rate samples, wrapped to [-MN/2, MN/2).
double timing_error_samples(const DetectionDecision& d, const ChannelParams& truth);

Outcome classify_trial(const DetectionDecision& decision, const ChannelParams& truth, int true_u);

struct UserTruth {
  int u = 0;
  ChannelParams params;
};

// Per-user outcome from the strongest detections (at most one per root). A user
// whose root was not reported is miss_no_peak when fewer detections than users
// were produced and miss_wrong_preamble otherwise.
std::vector<Outcome> classify_users(const std::vector<DetectionDecision>& detections,
                                    const std::vector<UserTruth>& users);

}  // namespace otfs
