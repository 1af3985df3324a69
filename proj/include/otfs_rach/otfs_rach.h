#ifndef OTFS_RACH_H
#define OTFS_RACH_H

#include <stddef.h>
#include <stdint.h>

#if defined(OTFS_RACH_BUILDING_LIBRARY)
#define OTFS_RACH_API __attribute__((visibility("default")))
#else
#define OTFS_RACH_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum otfs_status {
  OTFS_OK = 0,
  OTFS_ERR_RUNTIME = 1,
  OTFS_ERR_CONFIG = 2,
  OTFS_ERR_INFEASIBLE = 3,
  OTFS_ERR_INVALID_ARGUMENT = 4,
  OTFS_ERR_DIMENSION = 5,
  OTFS_ERR_CAPACITY = 6,
  OTFS_ERR_IO = 7
} otfs_status;

typedef struct otfs_complex {
  double re;
  double im;
} otfs_complex;

typedef struct otfs_preamble otfs_preamble;
typedef struct otfs_detector otfs_detector;

typedef struct otfs_detection {
  int detected;
  int u_hat;
  double r_m_hat;
  int q_m_hat;
  double peak;
  double tau_hat_s;
} otfs_detection;

OTFS_RACH_API const char* otfs_version(void);

/* Message and JSON description ({"status", "message", "field"|"bound"}) of the
   last failure on the calling thread. Valid until the next call on that thread. */
OTFS_RACH_API const char* otfs_last_error_message(void);
OTFS_RACH_API const char* otfs_last_error_json(void);

OTFS_RACH_API void otfs_free_string(char* s);

/* Runs the experiment named in the config file. On success *out_json holds
   {"experiment", "summary", "report_text", "files", "report"}; release it with
   otfs_free_string. workers <= 0 uses every hardware thread; out_dir may be NULL. */
OTFS_RACH_API otfs_status otfs_run(const char* config_path, const char* const* overrides, size_t n_overrides,
                                   int workers, const char* out_dir, char** out_json);

/* Preamble handle: DD frame and critical-rate burst (L_cp + M N samples) for one root. */
OTFS_RACH_API otfs_status otfs_preamble_create(int M, int N, double delta_f_hz, int root, otfs_preamble** out);
OTFS_RACH_API void otfs_preamble_free(otfs_preamble* p);
/* Copies min(cap, M*N) row-major DD samples; *len receives M*N. */
OTFS_RACH_API otfs_status otfs_preamble_dd_frame(const otfs_preamble* p, otfs_complex* out, size_t cap, size_t* len);
OTFS_RACH_API otfs_status otfs_preamble_time_frame(const otfs_preamble* p, otfs_complex* out, size_t cap,
                                                   size_t* len);

/* Discrete Zak transform pair on row-major M x N grids. */
OTFS_RACH_API otfs_status otfs_dzt(const otfs_complex* x, size_t len, int M, int N, otfs_complex* out);
OTFS_RACH_API otfs_status otfs_idzt(const otfs_complex* grid, size_t len, int M, int N, otfs_complex* out);

OTFS_RACH_API otfs_status otfs_threshold_from_pfa(double p_fa, int M, int N, double* out);

/* mode: "native" or "interpolated". roots may be NULL for 1..n_roots. */
OTFS_RACH_API otfs_status otfs_detector_create(int M, int N, double delta_f_hz, const int* roots, size_t n_roots,
                                               const char* mode, otfs_detector** out);
OTFS_RACH_API void otfs_detector_free(otfs_detector* d);
/* grid: row-major received DD frame of M*N samples. refine applies the
   half-sample step (native mode only). */
OTFS_RACH_API otfs_status otfs_detector_detect(const otfs_detector* d, const otfs_complex* grid, size_t len,
                                               double r_th, int refine, otfs_detection* out);

#ifdef __cplusplus
}
#endif

#endif
