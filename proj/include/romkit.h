/* romkit: data-driven reduced-order models with closeness certificates.
 *
 * C interface over the core library. All functions are synchronous.
 * Functions returning a pointer yield NULL on failure; functions
 * returning romkit_status yield ROMKIT_OK on success. In both cases
 * romkit_last_error() describes the most recent failure on the calling
 * thread.
 */
#ifndef ROMKIT_H
#define ROMKIT_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  ROMKIT_OK = 0,
  ROMKIT_ERR_INVALID = 1,    /* bad arguments, malformed config */
  ROMKIT_ERR_RANK = 2,       /* data not rich enough */
  ROMKIT_ERR_INFEASIBLE = 3, /* no certificate / failed check */
  ROMKIT_ERR_DIVERGED = 4,   /* simulation blew up */
  ROMKIT_ERR_IO = 5,         /* file problems */
  ROMKIT_ERR_INTERNAL = 6
} romkit_status;

typedef struct romkit_config_t romkit_config_t;
typedef struct romkit_reduction_t romkit_reduction_t;

const char* romkit_version(void);
const char* romkit_last_error(void);

/* Configuration ------------------------------------------------------ */

romkit_config_t* romkit_config_load(const char* path);
/* Built-in benchmark setup: "ct10", "dt10", "pendulum_ct", "pendulum_dt". */
romkit_config_t* romkit_config_demo(const char* benchmark);
/* Dotted-path override, e.g. ("experiment.seed", "7") or ("out_dir", "run1"). */
romkit_status romkit_config_set(romkit_config_t* config, const char* key,
                                const char* value);
romkit_status romkit_config_save(const romkit_config_t* config,
                                 const char* path);
void romkit_config_destroy(romkit_config_t* config);

/* Pipeline stages over the artifact directory named by the config's
 * out_dir. Later stages read the files earlier stages wrote. Stages
 * that evaluate a certificate set *pass (0/1) and still return
 * ROMKIT_OK when the evaluation itself succeeded. */

romkit_status romkit_run_collect(const romkit_config_t* config);
romkit_status romkit_run_reduce(const romkit_config_t* config, int dump_lmi);
romkit_status romkit_run_verify(const romkit_config_t* config, int* pass);
romkit_status romkit_run_bound(const romkit_config_t* config);
romkit_status romkit_run_synthesize(const romkit_config_t* config, int* pass);
romkit_status romkit_run_demo(const romkit_config_t* config, int* pass);

/* Reduction archives -------------------------------------------------- */

romkit_reduction_t* romkit_reduction_load(const char* path);
void romkit_reduction_destroy(romkit_reduction_t* reduction);

romkit_status romkit_reduction_dims(const romkit_reduction_t* reduction,
                                    int* n, int* m, int* d, int* nhat);
/* Named scalars: alpha, kappa, rho, mu, kappa_hat, gamma, eta, nu,
 * lmi_margin. Returns NaN for unknown names. */
double romkit_reduction_scalar(const romkit_reduction_t* reduction,
                               const char* name);
/* Named matrices as in the archive (P, H, Q, Qbar, R1, R2, Ahat, Bhat,
 * Chat, Xi, Psi, G, Bdata, Aest, XplusQ). Pass values == NULL to query
 * the size; otherwise values must hold rows*cols doubles (row-major). */
romkit_status romkit_reduction_matrix(const romkit_reduction_t* reduction,
                                      const char* name, double* values,
                                      int* rows, int* cols);
/* Refines a reduced input: u = G (D(x) - R xhat) + Xi xhat + Psi uhat.
 * x has length n, xhat and uhat length nhat, u length m. */
romkit_status romkit_interface_input(const romkit_reduction_t* reduction,
                                     const double* x, const double* xhat,
                                     const double* uhat, double* u);

/* Closeness-bound arithmetic ------------------------------------------ */

/* (1/alpha) s0 exp(-kappa t) + rho/(alpha kappa) * uhat_inf */
double romkit_bound_ct_reported(double s0, double t, double alpha,
                                double kappa, double rho, double uhat_inf);
/* sqrt((exp(-kappa t) s0 + rho/kappa (1-exp(-kappa t)) uhat_inf^2)/alpha) */
double romkit_bound_ct_envelope(double s0, double t, double alpha,
                                double kappa, double rho, double uhat_inf);
/* sqrt(rho * nu / ((1-kappa) * eta) / alpha) */
double romkit_relation_epsilon(double rho, double kappa, double eta,
                               double alpha, double nu);

#ifdef __cplusplus
}
#endif

#endif /* ROMKIT_H */
