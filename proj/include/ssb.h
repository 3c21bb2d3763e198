#ifndef SSB_H
#define SSB_H

/* C interface to the spectrum-sensing benchmark library.
 *
 * Every function returns an ssb_status; on failure a human-readable message
 * is available from ssb_last_error() until the next call on the same thread.
 * Strings returned through out-parameters are owned by the caller and must
 * be released with ssb_free_string(). */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ssb_status {
  SSB_OK = 0,
  SSB_ERR_INVALID_ARG = 1, /* bad argument or malformed configuration */
  SSB_ERR_IO = 2,          /* file could not be opened/read/written */
  SSB_ERR_FORMAT = 3,      /* file exists but its contents are invalid */
  SSB_ERR_RUNTIME = 4      /* anything else (e.g. diverged training) */
} ssb_status;

/* Message for the most recent failure on the calling thread. Never NULL. */
const char* ssb_last_error(void);

void ssb_free_string(char* s);

/* ------------------------------------------------------------------ */
/* dataset synthesis                                                   */

typedef struct ssb_signal_params {
  double rolloff;
  int32_t samples_per_symbol;
  int32_t filter_span_symbols;
  double snr_db;
  int32_t window_len;
} ssb_signal_params;

typedef struct ssb_dataset_spec {
  ssb_signal_params params;
  uint64_t n_train;
  uint64_t n_val;
  uint64_t n_test;
  uint64_t seed;
} ssb_dataset_spec;

/* Fills *out with the benchmark defaults (roll-off 0.35, 10 samples per
 * symbol, 3 dB SNR, 111-sample windows, empty splits, seed 0). */
void ssb_dataset_spec_defaults(ssb_dataset_spec* out);

typedef struct ssb_dataset ssb_dataset; /* opaque */

ssb_status ssb_dataset_generate(const ssb_dataset_spec* spec,
                                ssb_dataset** out);
ssb_status ssb_dataset_load(const char* path, ssb_dataset** out);
ssb_status ssb_dataset_save(const ssb_dataset* ds, const char* path);
void ssb_dataset_free(ssb_dataset* ds);

/* split: 0 = train, 1 = val, 2 = test */
ssb_status ssb_dataset_split_size(const ssb_dataset* ds, int32_t split,
                                  uint64_t* out);
ssb_status ssb_dataset_spec_of(const ssb_dataset* ds, ssb_dataset_spec* out);

/* ------------------------------------------------------------------ */
/* energy-detector baseline                                            */

typedef struct ssb_metrics {
  double p_d;
  double p_fa;
  double p_fd;
  double threshold;
  uint64_t n_busy;
  uint64_t n_idle;
} ssb_metrics;

/* Calibrates the detection threshold on the validation split at target_pfa
 * and evaluates on the test split. */
ssb_status ssb_energy_detector_eval(const ssb_dataset* ds, double target_pfa,
                                    ssb_metrics* out);

/* ------------------------------------------------------------------ */
/* analytic cost models                                                */

/* `json` holds one of: a single architecture object, an array of
 * {"name":..., "arch":...} pairs, or a full experiment configuration (the
 * costs of its entries are reported). Produces CSV with one row per
 * architecture: name,family,n_op,m_peak,m_total. */
ssb_status ssb_costs_csv(const char* json, char** out_csv);

/* Same, reading the JSON document from a file. */
ssb_status ssb_costs_csv_from_file(const char* path, char** out_csv);

/* ------------------------------------------------------------------ */
/* experiments and reports                                             */

/* Runs (or resumes) the experiment described by the configuration file,
 * writing report.json, runs.csv, summary.csv, per-run checkpoints and
 * training history under out_dir. workers <= 0 selects a single worker. */
ssb_status ssb_run_experiment(const char* config_path, const char* out_dir,
                              int32_t workers);

/* Renders detection.svg / ops.svg / memory.svg from a report.json. */
ssb_status ssb_render_report(const char* report_path, const char* out_dir);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SSB_H */
