#include "otfs_rach/otfs_rach.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "otfs_rach/detector.hpp"
#include "otfs_rach/runner.hpp"
#include "otfs_rach/transmitter.hpp"
#include "otfs_rach/zak.hpp"

struct otfs_preamble {
  otfs::PreambleConfig cfg;
  otfs::DDGrid dd;
  otfs::CVec burst;
};

struct otfs_detector {
  otfs::Detector det;
};

namespace {

thread_local std::string g_message;
thread_local std::string g_json = "null";

void clear_error() {
  g_message.clear();
  g_json = "null";
}

otfs_status set_error(otfs_status s, const std::string& msg, const char* key = nullptr, const std::string& val = {}) {
  g_message = msg;
  nlohmann::json j{{"status", static_cast<int>(s)}, {"message", msg}};
  if (key) j[key] = val;
  g_json = j.dump();
  return s;
}

template <class Fn>
otfs_status guarded(Fn&& fn) {
  clear_error();
  try {
    fn();
    return OTFS_OK;
  } catch (const otfs::ConfigError& e) {
    return set_error(OTFS_ERR_CONFIG, e.what(), "field", e.field());
  } catch (const otfs::InfeasibleError& e) {
    return set_error(OTFS_ERR_INFEASIBLE, e.what(), "bound", e.bound());
  } catch (const otfs::DimensionError& e) {
    return set_error(OTFS_ERR_DIMENSION, e.what());
  } catch (const otfs::CapacityError& e) {
    return set_error(OTFS_ERR_CAPACITY, e.what());
  } catch (const otfs::IoError& e) {
    return set_error(OTFS_ERR_IO, e.what());
  } catch (const otfs::DomainError& e) {
    return set_error(OTFS_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(OTFS_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return set_error(OTFS_ERR_RUNTIME, e.what());
  } catch (...) {
    return set_error(OTFS_ERR_RUNTIME, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw otfs::DomainError(what);
}

otfs::CVec to_cvec(const otfs_complex* p, std::size_t n) {
  otfs::CVec v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = {p[i].re, p[i].im};
  return v;
}

void copy_out(const otfs::CVec& v, otfs_complex* out) {
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = {v[i].real(), v[i].imag()};
}

otfs_status copy_bounded(const otfs::CVec& v, otfs_complex* out, std::size_t cap, std::size_t* len) {
  return guarded([&] {
    require(len != nullptr, "len must not be NULL");
    *len = v.size();
    if (out == nullptr) return;
    const std::size_t n = cap < v.size() ? cap : v.size();
    for (std::size_t i = 0; i < n; ++i) out[i] = {v[i].real(), v[i].imag()};
  });
}

}  // namespace

extern "C" {

const char* otfs_version(void) { return OTFS_RACH_VERSION; }

const char* otfs_last_error_message(void) { return g_message.c_str(); }

const char* otfs_last_error_json(void) { return g_json.c_str(); }

void otfs_free_string(char* s) { std::free(s); }

otfs_status otfs_run(const char* config_path, const char* const* overrides, size_t n_overrides, int workers,
                     const char* out_dir, char** out_json) {
  return guarded([&] {
    require(config_path != nullptr, "config_path must not be NULL");
    require(out_json != nullptr, "out_json must not be NULL");
    require(n_overrides == 0 || overrides != nullptr, "overrides must not be NULL");
    *out_json = nullptr;
    otfs::RunOptions opt;
    for (std::size_t i = 0; i < n_overrides; ++i) {
      require(overrides[i] != nullptr, "override entries must not be NULL");
      opt.overrides.emplace_back(overrides[i]);
    }
    opt.workers = workers;
    if (out_dir) opt.output_dir = std::string(out_dir);
    const otfs::RunResult r = otfs::run_file(config_path, opt);
    const nlohmann::json j{{"experiment", r.experiment},
                           {"summary", r.summary},
                           {"report_text", r.report_text},
                           {"files", r.files},
                           {"report", r.report}};
    *out_json = dup_string(j.dump());
  });
}

otfs_status otfs_preamble_create(int M, int N, double delta_f_hz, int root, otfs_preamble** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be NULL");
    *out = nullptr;
    otfs::PreambleConfig cfg;
    cfg.M = M;
    cfg.N = N;
    cfg.delta_f_hz = delta_f_hz;
    cfg.root = root;
    cfg.validate();
    auto* p = new otfs_preamble{cfg, otfs::build_dd_frame(cfg), otfs::build_burst(cfg)};
    *out = p;
  });
}

void otfs_preamble_free(otfs_preamble* p) { delete p; }

otfs_status otfs_preamble_dd_frame(const otfs_preamble* p, otfs_complex* out, size_t cap, size_t* len) {
  if (!p) return guarded([] { require(false, "preamble handle must not be NULL"); });
  return copy_bounded(p->dd.values, out, cap, len);
}

otfs_status otfs_preamble_time_frame(const otfs_preamble* p, otfs_complex* out, size_t cap, size_t* len) {
  if (!p) return guarded([] { require(false, "preamble handle must not be NULL"); });
  return copy_bounded(p->burst, out, cap, len);
}

otfs_status otfs_dzt(const otfs_complex* x, size_t len, int M, int N, otfs_complex* out) {
  return guarded([&] {
    require(x != nullptr && out != nullptr, "buffers must not be NULL");
    require(M > 0 && N > 0, "M and N must be positive");
    const otfs::CVec v = to_cvec(x, len);
    copy_out(otfs::dzt(v, M, N).values, out);
  });
}

otfs_status otfs_idzt(const otfs_complex* grid, size_t len, int M, int N, otfs_complex* out) {
  return guarded([&] {
    require(grid != nullptr && out != nullptr, "buffers must not be NULL");
    require(M > 0 && N > 0, "M and N must be positive");
    if (len != static_cast<std::size_t>(M) * static_cast<std::size_t>(N)) {
      throw otfs::DimensionError("grid length must equal M*N");
    }
    otfs::DDGrid g(M, N);
    g.values = to_cvec(grid, len);
    copy_out(otfs::idzt(g), out);
  });
}

otfs_status otfs_threshold_from_pfa(double p_fa, int M, int N, double* out) {
  return guarded([&] {
    require(out != nullptr, "out must not be NULL");
    *out = otfs::threshold_from_pfa(p_fa, M, N);
  });
}

otfs_status otfs_detector_create(int M, int N, double delta_f_hz, const int* roots, size_t n_roots, const char* mode,
                                 otfs_detector** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be NULL");
    *out = nullptr;
    require(N > 0, "N must be positive");
    require(delta_f_hz > 0.0, "delta_f_hz must be positive");
    std::optional<std::vector<int>> table;
    if (roots) table = std::vector<int>(roots, roots + n_roots);
    auto cands = otfs::preamble_root_set(M, static_cast<int>(n_roots), table);
    const auto m = otfs::parse_resolution_mode(mode ? mode : "native");
    *out = new otfs_detector{otfs::Detector(M, N, delta_f_hz, std::move(cands), m)};
  });
}

void otfs_detector_free(otfs_detector* d) { delete d; }

otfs_status otfs_detector_detect(const otfs_detector* d, const otfs_complex* grid, size_t len, double r_th,
                                 int refine, otfs_detection* out) {
  return guarded([&] {
    require(d != nullptr && grid != nullptr && out != nullptr, "arguments must not be NULL");
    const int M = d->det.M();
    const int N = d->det.N();
    if (len != static_cast<std::size_t>(M) * static_cast<std::size_t>(N)) {
      throw otfs::DimensionError("grid length must equal M*N");
    }
    otfs::DDGrid z(M, N);
    z.values = to_cvec(grid, len);
    const otfs::DecisionGrid g = d->det.grid(z);
    otfs::DetectionDecision dec = otfs::detect(g, r_th);
    if (refine && dec.detected) dec = otfs::refine_fractional(g, dec);
    *out = {dec.detected ? 1 : 0, dec.u_hat, dec.r_m_hat, dec.q_m_hat, dec.peak, dec.tau_hat_s};
  });
}

}  // extern "C"
