/* Public C interface of the fptrace simulation library.
 *
 * Everything is driven through opaque handles and status codes; richer data
 * crosses the boundary as JSON text. Strings returned through `char**
 * out` parameters are owned by the caller and must be released with
 * fpt_string_free.
 */
#ifndef FPTRACE_FPTRACE_H
#define FPTRACE_FPTRACE_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fpt_status {
  FPT_OK = 0,
  FPT_ERR_INVALID_ARGUMENT = 1, /* bad config, bad parameter ranges */
  FPT_ERR_RUNTIME = 2,          /* failure while running */
  FPT_ERR_IO = 3,               /* file system problems */
} fpt_status;

/* Message for the most recent failure on this thread; empty string if none.
 * The pointer stays valid until the next failing call on the same thread. */
const char* fpt_last_error(void);

void fpt_string_free(char* s);

const char* fpt_version(void);

/* ---- Code parameters ---------------------------------------------------
 * Derivation of the full interactive-code parameter set from (n, N, beta,
 * delta). The paper-exact mode computes sigma and the round count; the
 * scaled mode takes them as inputs. `fpt_params_to_json` renders every
 * derived field. */
typedef struct fpt_params fpt_params;

fpt_status fpt_params_derive(int64_t collusion, int64_t num_users, double beta,
                             double delta, fpt_params** out);
fpt_status fpt_params_derive_scaled(int64_t collusion, int64_t num_users,
                                    double beta, double delta, double sigma,
                                    int64_t rounds, fpt_params** out);
fpt_status fpt_params_to_json(const fpt_params* params, char** json_out);
void fpt_params_free(fpt_params* params);

/* ---- Experiments --------------------------------------------------------
 * An experiment is described by a JSON config document (see README for the
 * schema). Create validates the config; run executes it; the summary is the
 * aggregate JSON. Per-trial JSONL is available separately. */
typedef struct fpt_experiment fpt_experiment;

fpt_status fpt_experiment_create(const char* config_json,
                                 fpt_experiment** out);
fpt_status fpt_experiment_run(fpt_experiment* experiment);
fpt_status fpt_experiment_summary_json(const fpt_experiment* experiment,
                                       char** json_out);
fpt_status fpt_experiment_trials_jsonl(const fpt_experiment* experiment,
                                       char** jsonl_out);
/* 1 if every internal pass/fail gate of the experiment held (lemma sweeps,
 * calibration feasibility), else 0. Plain trial experiments report 1. */
fpt_status fpt_experiment_all_pass(const fpt_experiment* experiment,
                                   int* out);
void fpt_experiment_free(fpt_experiment* experiment);

#ifdef __cplusplus
}
#endif

#endif /* FPTRACE_FPTRACE_H */
