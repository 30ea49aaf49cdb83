#ifndef DELAYPRED_DELAYPRED_H
#define DELAYPRED_DELAYPRED_H

/*
 * C interface to the delaypred toolkit: predictor feedback, backstepping
 * Lyapunov functions, robustness bounds and minimax redesign for
 * discrete-time plants with input delay.
 *
 * Every function returning dp_status leaves a thread-local message for
 * dp_last_error() when it fails. Handles are opaque and owned by the caller;
 * release them with the matching *_destroy function (NULL is accepted).
 * Extended states are passed as x (length n) and y (length r, oldest input
 * first).
 */

#ifdef __cplusplus
extern "C" {
#endif

#if defined(DELAYPRED_BUILDING)
#define DP_API __attribute__((visibility("default")))
#else
#define DP_API
#endif

typedef enum dp_status {
  DP_OK = 0,
  DP_ERR_ARGUMENT = 1,
  DP_ERR_VALIDATION = 2,
  DP_ERR_NUMERICAL = 3,
  DP_ERR_CONFIG = 4,
  DP_ERR_IO = 5,
  DP_ERR_INTERNAL = 6
} dp_status;

typedef enum dp_law { DP_LAW_REDESIGNED = 0, DP_LAW_NOMINAL = 1 } dp_law;

typedef enum dp_certify_mode {
  DP_CERTIFY_AT = 0,
  DP_CERTIFY_SEARCH = 1
} dp_certify_mode;

typedef struct dp_plant dp_plant;
typedef struct dp_stabilizer dp_stabilizer;
typedef struct dp_setup dp_setup;
typedef struct dp_report dp_report;
typedef struct dp_scenario dp_scenario;

DP_API const char* dp_last_error(void);
DP_API const char* dp_status_name(dp_status status);

/* Plant x+ = A x + B u(t-r) + d G x, |d| <= a. A and G are n x n row-major. */
DP_API dp_status dp_plant_create(const double* A, const double* B,
                                 const double* G, int n, double a, int r,
                                 dp_plant** out);
DP_API void dp_plant_destroy(dp_plant* plant);
DP_API int dp_plant_n(const dp_plant* plant);
DP_API int dp_plant_r(const dp_plant* plant);

/* One step of the delay-free form; x_out has length n, y_out length r. */
DP_API dp_status dp_step(const dp_plant* plant, const double* x,
                         const double* y, double u, double d, double* x_out,
                         double* y_out);
/* F_i, 0 <= i <= r, into out (length n). */
DP_API dp_status dp_predictor(const dp_plant* plant, const double* x,
                              const double* y, int i, double* out);

/* Nominal design u = k'x, V = x'Px. A negative lambda requests the smallest
 * feasible value for the plant. */
DP_API dp_status dp_stabilizer_create(const dp_plant* plant, const double* k,
                                      const double* P, double lambda,
                                      dp_stabilizer** out);
DP_API void dp_stabilizer_destroy(dp_stabilizer* stab);
DP_API double dp_stabilizer_lambda(const dp_stabilizer* stab);
DP_API dp_status dp_validate_stabilizer(const dp_plant* plant,
                                        const dp_stabilizer* stab,
                                        double* lambda_star);
DP_API dp_status dp_nominal_feedback(const dp_plant* plant,
                                     const dp_stabilizer* stab,
                                     const double* x, const double* y,
                                     double* u);

/* Redesign setup with backstepping constants c, phi and target sigma. */
DP_API dp_status dp_setup_create(const dp_plant* plant,
                                 const dp_stabilizer* stab, double c,
                                 double phi, double sigma, dp_setup** out);
DP_API void dp_setup_destroy(dp_setup* setup);
DP_API dp_status dp_lyapunov(const dp_setup* setup, const double* x,
                             const double* y, double* out);
DP_API dp_status dp_redesigned_feedback(const dp_setup* setup,
                                        const double* x, const double* y,
                                        double a, double* u);
DP_API dp_status dp_worst_case_value(const dp_setup* setup, const double* x,
                                     const double* y, double u, double a,
                                     double* out);

DP_API dp_status dp_certify(const dp_setup* setup, double a, dp_law law,
                            dp_report** out);
DP_API dp_status dp_max_certified_a(const dp_setup* setup, double a_hi,
                                    dp_law law, dp_report** out);
DP_API int dp_report_pass(const dp_report* report);
DP_API double dp_report_margin(const dp_report* report);
/* Returns 1 and writes *a when the report carries a largest certified a. */
DP_API int dp_report_largest_a(const dp_report* report, double* a);
/* key=value lines; valid until the report is destroyed. */
DP_API const char* dp_report_text(const dp_report* report);
DP_API void dp_report_destroy(dp_report* report);

/* Necessary and sufficient bounds for the scalar integrator; *c_star is NaN
 * for r <= 1. */
DP_API dp_status dp_bound(int r, double* necessary, double* sufficient,
                          double* c_star);
/* "necessary=... sufficient=... c_star=..." into buf (NUL-terminated). */
DP_API dp_status dp_bound_line(int r, char* buf, int size);
/* Table CSV to path, or stdout when path is NULL. */
DP_API dp_status dp_table1_write(const char* path);
DP_API dp_status dp_scalar_certify(double a, double q, int grid, int* pass,
                                   double* worst_margin);

DP_API dp_status dp_scenario_load(const char* path, dp_scenario** out);
DP_API void dp_scenario_destroy(dp_scenario* scenario);
DP_API dp_status dp_scenario_certify(const dp_scenario* scenario,
                                     dp_certify_mode mode, double value,
                                     dp_report** out);
/* Writes the trajectory CSV to csv_path (stdout when NULL). */
DP_API dp_status dp_scenario_simulate(const dp_scenario* scenario,
                                      const char* csv_path,
                                      double* decay_rate, int* diverged);
/* Shortest round-trip rendering that always contains a decimal point. */
DP_API dp_status dp_format_real(double v, char* buf, int size);

#ifdef __cplusplus
}
#endif

#endif
