/* C interface for the credal-pac library.
 *
 * Maintained by hand alongside src/lib.rs; a test in the crate checks
 * that the declarations below stay in sync with the exported symbols.
 *
 * Conventions:
 *   - every fallible call returns a cpac_status; CPAC_OK is 0;
 *   - cpac_last_error_message() describes the most recent failure on
 *     the calling thread (do not free the pointer);
 *   - char** out-parameters receive NUL-terminated strings owned by
 *     the caller; release them with cpac_string_free;
 *   - cpac_config / cpac_report are opaque handles released with their
 *     matching *_free functions.
 */

#ifndef CREDAL_PAC_H
#define CREDAL_PAC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cpac_status {
  CPAC_OK = 0,
  CPAC_NULL_POINTER = 1,
  CPAC_INVALID_UTF8 = 2,
  CPAC_PARSE_ERROR = 3,
  CPAC_INVALID_ARGUMENT = 4,
  CPAC_RUN_ERROR = 5,
  CPAC_INTERNAL_ERROR = 6,
} cpac_status;

typedef struct cpac_config cpac_config;
typedef struct cpac_report cpac_report;

/* Errors and string ownership. */
const char *cpac_last_error_message(void);
void cpac_string_free(char *text);

/* Experiment configs (TOML documents). */
cpac_status cpac_config_parse(const char *text, cpac_config **out);
void cpac_config_free(cpac_config *config);
cpac_status cpac_config_set_seed(cpac_config *config, uint64_t seed);
cpac_status cpac_config_digest(const cpac_config *config, char **out);

/* Monte Carlo campaigns. */
cpac_status cpac_run(const cpac_config *config, cpac_report **out);
void cpac_report_free(cpac_report *report);
cpac_status cpac_report_to_json(const cpac_report *report, char **out);
cpac_status cpac_report_to_csv(const cpac_report *report, char **out);
cpac_status cpac_report_has_violation(const cpac_report *report, int *out);

/* Realisability diagnostics (JSON). */
cpac_status cpac_check_realisability_json(const cpac_config *config,
                                          double tolerance, char **out);

/* Closed-form bounds. */
cpac_status cpac_eps_finite_realisable(size_t class_size, double delta,
                                       size_t n, double *out);
cpac_status cpac_eps_finite_agnostic(size_t class_size, double delta, size_t n,
                                     double *out);
cpac_status cpac_eps_rademacher(double rademacher, double delta, size_t n,
                                double *out);
cpac_status cpac_gn_tail(size_t n, double eps, double *out);
cpac_status cpac_hoeffding_tail_uniform(size_t n, double eps, double width,
                                        double *out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CREDAL_PAC_H */
