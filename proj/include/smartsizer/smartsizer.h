/* C interface to the smartsizer library.
 *
 * Every function returns an ss_status; on failure ss_last_error() holds a
 * one-line message for the calling thread. Handles are opaque and owned by
 * the caller, who releases them with the matching *_destroy function.
 * Arm indices are 0-based throughout.
 */
#ifndef SMARTSIZER_H
#define SMARTSIZER_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SS_API __declspec(dllexport)
#else
#define SS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ss_status {
    SS_OK = 0,
    SS_ERR_INVALID_ARGUMENT = 1,
    SS_ERR_NOT_SQUARE = 2,
    SS_ERR_NOT_SYMMETRIC = 3,
    SS_ERR_NOT_POSITIVE_DEFINITE = 4,
    SS_ERR_EMPTY_INPUT = 5,
    SS_ERR_PROBABILITY_OUT_OF_RANGE = 6,
    SS_ERR_ALPHA_OUT_OF_RANGE = 7,
    SS_ERR_BETA_OUT_OF_RANGE = 8,
    SS_ERR_DEGENERATE_PAIR = 9,
    SS_ERR_DIMENSION_MISMATCH = 10,
    SS_ERR_EMPTY_EXCLUSION_SET = 11,
    SS_ERR_ZERO_EFFECT = 12,
    SS_ERR_NOT_REACHED = 13,
    SS_ERR_SINGULAR_SYSTEM = 14,
    SS_ERR_PARSE = 15,
    SS_ERR_IO = 16,
    SS_ERR_NUMERICAL = 17,
    SS_ERR_BUFFER_TOO_SMALL = 18,
    SS_ERR_INTERNAL = 99
} ss_status;

/* Warning bits reported alongside results. */
#define SS_WARN_NOTHING_TO_EXCLUDE 1u
#define SS_WARN_ALREADY_POWERED 2u
#define SS_WARN_COVARIANCE_SEMIDEFINITE 4u
#define SS_WARN_VERIFICATION_RERUN 8u

typedef struct ss_covariance ss_covariance;
typedef struct ss_effects ss_effects;

typedef struct ss_mc_config {
    uint64_t reps;
    uint64_t seed;
} ss_mc_config;

typedef struct ss_estimate {
    double value;
    double mc_se;
    uint64_t reps;
    uint64_t seed;
} ss_estimate;

SS_API const char* ss_version(void);
SS_API const char* ss_generator_name(void);
SS_API const char* ss_last_error(void);
SS_API const char* ss_status_name(ss_status status);
/* Default reps (10^6) and seed. */
SS_API ss_mc_config ss_mc_default(void);

/* Covariance of sqrt(n) * theta_hat. psd_tolerance <= 0 selects the default. */
SS_API ss_status ss_covariance_create(const double* row_major, size_t dim, double psd_tolerance,
                                      ss_covariance** out);
SS_API ss_status ss_covariance_load(const char* path, ss_covariance** out);
SS_API ss_status ss_covariance_save(const ss_covariance* cov, const char* path);
SS_API void ss_covariance_destroy(ss_covariance* cov);
SS_API size_t ss_covariance_dim(const ss_covariance* cov);
SS_API int ss_covariance_semidefinite(const ss_covariance* cov);
/* Copies dim * dim entries, row major. */
SS_API ss_status ss_covariance_entries(const ss_covariance* cov, double* out, size_t capacity);

/* Writes any square matrix (CSV, or JSON for a .json path). */
SS_API ss_status ss_matrix_save(const double* row_major, size_t dim, const char* path);
/* Parses an inline list ("1, 2, 3") or a vector file into out. */
SS_API ss_status ss_read_vector(const char* file_or_list, double* out, size_t capacity, size_t* length);

SS_API ss_status ss_effects_from_delta(const double* delta, size_t dim, size_t best_index, double delta_min,
                                       int standardized, ss_effects** out);
/* Best arm and effects implied by estimates; lower_is_better != 0 flips the order. */
SS_API ss_status ss_effects_from_theta(const double* theta, size_t dim, int lower_is_better, double delta_min,
                                       ss_effects** out);
SS_API void ss_effects_destroy(ss_effects* effects);
SS_API size_t ss_effects_best_index(const ss_effects* effects);
SS_API double ss_effects_delta_min(const ss_effects* effects);
SS_API ss_status ss_effects_delta(const ss_effects* effects, double* out, size_t capacity);

SS_API ss_status ss_critical_values(const ss_covariance* cov, double alpha, ss_mc_config mc, double* out,
                                    size_t capacity);

typedef struct ss_power_report {
    ss_estimate estimate;
    unsigned warnings;
    size_t exclusion_count;
} ss_power_report;

/* critical_out (dim entries) and exclusion_out (dim entries) may be NULL. */
SS_API ss_status ss_power(const ss_covariance* cov, const ss_effects* effects, uint64_t n, double alpha,
                          ss_mc_config mc, ss_power_report* report, double* critical_out, size_t* exclusion_out);
/* One estimate per ascending grid entry, all on the same draws. */
SS_API ss_status ss_power_curve(const ss_covariance* cov, const ss_effects* effects, const uint64_t* n_grid,
                                size_t count, double alpha, ss_mc_config mc, ss_estimate* out);

typedef struct ss_size_report {
    uint64_t n;
    double c_star;
    ss_estimate verified_power;
    uint64_t reps_used;
    unsigned warnings;
    size_t exclusion_count;
} ss_size_report;

SS_API ss_status ss_sample_size(const ss_covariance* cov, const ss_effects* effects, double alpha, double beta,
                                ss_mc_config mc, ss_size_report* report, double* critical_out,
                                size_t* exclusion_out);
SS_API ss_status ss_sample_size_bisection(const ss_covariance* cov, const ss_effects* effects, double alpha,
                                          double beta, ss_mc_config mc, uint64_t n_max, ss_size_report* report);

/* member_flags[i] = 1 when arm i is in the set of best. */
SS_API ss_status ss_set_of_best(const ss_covariance* cov, const double* theta_hat, size_t dim, int lower_is_better,
                                uint64_t n, double alpha, ss_mc_config mc, int* member_flags, size_t* member_count);

typedef enum ss_structure { SS_EXCHANGEABLE = 0, SS_BLOCK_EXCHANGEABLE = 1 } ss_structure;

typedef struct ss_projection {
    double sigma2;   /* exchangeable */
    double rho;
    double sigma1w2; /* block exchangeable */
    double sigma2w2;
    double rho1;
    double rho2;
    size_t singleton;
    int positive_definite;
    double distance;
} ss_projection;

/* matrix_out receives dim * dim entries (row major) and may be NULL. */
SS_API ss_status ss_project(const ss_covariance* cov, ss_structure structure, size_t singleton,
                            ss_projection* out, double* matrix_out);
SS_API ss_status ss_frobenius_distance(const ss_covariance* a, const ss_covariance* b, double* out);

typedef enum ss_method { SS_IPW = 0, SS_AIPW = 1 } ss_method;

typedef struct ss_trial_config {
    int design;          /* 1 or 2 */
    uint64_t n;
    uint64_t reps;
    double alpha;
    double delta_min;
    double delta;        /* < 0: design default */
    ss_method method;
    uint64_t seed;
    uint64_t critical_reps;
} ss_trial_config;

typedef struct ss_empirical_report {
    ss_estimate estimate;
    double bound_rate;
    uint64_t requested;
    uint64_t usable;
    uint64_t singular;
    uint64_t not_psd;
    size_t best_index;
    size_t exclusion_count;
} ss_empirical_report;

SS_API ss_trial_config ss_trial_default(int design);
/* exclusion_out (design dim entries) may be NULL. */
SS_API ss_status ss_empirical_power(const ss_trial_config* config, ss_empirical_report* report,
                                    size_t* exclusion_out);
SS_API ss_status ss_design_dim(int design, size_t* dim);
/* True regime means for the design; delta < 0 selects the default effect. */
SS_API ss_status ss_design_theta(int design, double delta, double* out, size_t capacity);
/* Average sandwich covariance over reps datasets of size n. */
SS_API ss_status ss_estimate_sigma(int design, uint64_t n, uint64_t reps, ss_method method, double delta,
                                   uint64_t seed, double* sigma_out, double* theta_out, size_t dim,
                                   uint64_t* used);
SS_API ss_status ss_trial_export_csv(int design, uint64_t n, double delta, uint64_t seed, const char* path);

/* Runs a JSON sweep description; *csv_out is released with ss_string_free. */
SS_API ss_status ss_sweep_run(const char* json_spec, const char* base_dir, char** csv_out);
SS_API ss_status ss_sweep_delta_min(const ss_covariance* cov, const ss_effects* effects, const double* grid,
                                    size_t count, double alpha, uint64_t n, ss_mc_config mc, ss_estimate* out);
SS_API ss_status ss_sweep_uniform_delta(const ss_covariance* cov, const double* grid, size_t count, double alpha,
                                        uint64_t n, ss_mc_config mc, size_t best_index, ss_estimate* out);
SS_API void ss_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
