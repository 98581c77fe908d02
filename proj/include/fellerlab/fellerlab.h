/* SPDX-License-Identifier: MIT */
/**
 * @file fellerlab.h
 * @brief C interface to fellerlab: boundary random walks that approximate
 *        Feller's Brownian motions on [0, inf).
 *
 * Conventions:
 *  - Every fallible call returns an fl_status. On failure, fl_last_error()
 *    returns a message for the calling thread, valid until its next call.
 *  - Objects are opaque handles released with the matching *_free function.
 *    Free functions accept NULL.
 *  - Output pointers are written only on success, except where noted.
 *  - Text results (CSV, descriptions) come back as fl_text handles.
 *  - NaN passed as an optional real means "use the default".
 */

#ifndef FELLERLAB_H
#define FELLERLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define FL_API __declspec(dllexport)
#else
#  define FL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fl_status {
    FL_OK = 0,
    FL_ERR_INVALID_ARGUMENT = 1,
    FL_ERR_DOMAIN = 2,
    FL_ERR_INADMISSIBLE = 3,
    FL_ERR_N_TOO_SMALL = 4,
    FL_ERR_BUDGET_EXCEEDED = 5,
    FL_ERR_PARSE = 6,
    FL_ERR_IO = 7,
    FL_ERR_INTERNAL = 8
} fl_status;

typedef enum fl_regime {
    FL_REGIME_AUTO = -1,
    FL_REGIME_SOJOURN = 0,
    FL_REGIME_REFLECTION = 1
} fl_regime;

typedef struct fl_params fl_params;
typedef struct fl_measure fl_measure;
typedef struct fl_text fl_text;

FL_API const char* fl_version(void);
FL_API const char* fl_last_error(void);
FL_API const char* fl_status_name(fl_status status);

/* ---- text ---------------------------------------------------------------- */

/** NUL-terminated contents. */
FL_API const char* fl_text_data(const fl_text* text);
FL_API size_t fl_text_size(const fl_text* text);
FL_API void fl_text_free(fl_text* text);

/* ---- boundary parameters --------------------------------------------------- */

FL_API fl_status fl_params_create(double p1, double p2, double p3, fl_params** out);
/** Appends an atom of p4. Cannot be combined with a density. */
FL_API fl_status fl_params_add_atom(fl_params* params, double location, double mass);
/** Sets p4(dx) = c x^(-alpha) dx on (0, support_max]. Cannot be combined with atoms. */
FL_API fl_status fl_params_set_power_density(fl_params* params, double c, double alpha, double support_max);
/** Key/value text: p1, p2, p3, p4.kind, p4.atoms, p4.density. */
FL_API fl_status fl_params_parse(const char* text, fl_params** out);
FL_API fl_status fl_params_load(const char* path, fl_params** out);
/**
 * absorbed, exponential_holding, sticky, mixed, reflected, elastic.
 * Coefficients the preset needs default to 1 when NaN. `regime` may be NULL.
 */
FL_API fl_status fl_params_preset(const char* name, double p1, double p2, double p3, fl_params** out,
                                  fl_regime* regime);
FL_API void fl_params_free(fl_params* params);

/** *admissible is 1 when a scaling scheme exists; *reason (may be NULL) explains a 0. */
FL_API fl_status fl_params_validate(const fl_params* params, int* admissible, fl_text** reason);
/** Rough boundary-stage duration: p3/(p1+|p4|), (p2/(p1+|p4|))^2 and their sum. */
FL_API fl_status fl_params_boundary_stage(const fl_params* params, double* sojourn_mean, double* reflection_time,
                                          double* total);
FL_API fl_status fl_params_describe(const fl_params* params, fl_text** out);

/* ---- jumping measures ------------------------------------------------------ */

/**
 * Jumping measure at scale n. With auto_bump, n is doubled until the residual
 * probability is nonnegative. *n_used receives the n actually used; on
 * FL_ERR_N_TOO_SMALL it receives the smallest admissible n found (0 if none).
 */
FL_API fl_status fl_measure_build(const fl_params* params, fl_regime regime, int64_t n, int auto_bump,
                                  fl_measure** out, int64_t* n_used);
/** Candidate measure for p2 = p3 = 0. No convergence guarantee is known. */
FL_API fl_status fl_measure_build_pure_jump_experimental(const fl_params* params, int64_t n, fl_measure** out);
/** Compact form "j:p, ..., kill:p"; the kill mass defaults to what is left. */
FL_API fl_status fl_measure_from_spec(const char* spec, fl_measure** out);
/** Measure file: a "kill,p" row and "j,p" rows. */
FL_API fl_status fl_measure_parse(const char* text, fl_measure** out);
FL_API fl_status fl_measure_format(const fl_measure* measure, fl_text** out);
FL_API double fl_measure_kill(const fl_measure* measure);
FL_API double fl_measure_prob(const fl_measure* measure, int64_t j);
FL_API int64_t fl_measure_max_index(const fl_measure* measure);
/** (1/n^2) [p_0/q + (p_1/q)^2] with q = p_kill + sum_{j>=2} p_j. */
FL_API fl_status fl_measure_discrete_stage(const fl_measure* measure, int64_t n, double* xi_n);
FL_API void fl_measure_free(fl_measure* measure);

/* ---- generating functions ---------------------------------------------------- */

/** F(x) = sum_k P_0(X_k = 0) x^k for 0 <= x < 1. */
FL_API fl_status fl_genfun_closed(const fl_measure* measure, double x, double* out);
FL_API fl_status fl_genfun_series(const fl_measure* measure, int terms, double x, double* partial_sum,
                                  double* tail_bound);
/** CSV x,f_closed,f_series_partial,tail_bound. */
FL_API fl_status fl_genfun_table(const fl_measure* measure, const double* xs, size_t count, int terms, fl_text** out);
/** e / sqrt(1 - e^(-2/m)). */
FL_API fl_status fl_occupation_bound(int64_t m, double* out);
FL_API fl_status fl_catalan(int i, int j0, uint64_t* out);
/** P_i(first hit of 0 at step j) for the simple symmetric walk. */
FL_API fl_status fl_first_passage(int i, int j, double* out);

/* ---- simulation and experiments ------------------------------------------- */

/**
 * Simulates `paths` walks of `steps` transitions. CSV with one row per path
 * (path_id,final_state,killed_at,visits_to_zero), or per step when full_paths.
 */
FL_API fl_status fl_simulate_csv(const fl_measure* measure, int64_t start, int64_t steps, int64_t paths,
                                 uint64_t seed, int full_paths, fl_text** out);

typedef struct fl_experiment_config {
    const char* preset;        /**< NULL or "" when params is set */
    double p1, p2, p3;         /**< preset coefficients, NaN for defaults */
    const fl_params* params;   /**< raw parameters, or NULL */
    fl_regime regime;
    double x0;
    const double* t_list;
    size_t t_count;
    const int64_t* n_list;     /**< strictly increasing */
    size_t n_count;
    int64_t paths;
    uint64_t seed;
    const char* statistic;     /**< "ks" (default), "cvm", "mean_abs" */
    double statistic_max;      /**< NaN for the default 0.03 */
    int require_decrease;
    double atom_tolerance;     /**< NaN to skip */
    double kill_tolerance;     /**< NaN to skip */
    int auto_bump;
    int64_t n_ref;             /**< 0: 4 x max n */
    int64_t reference_paths;   /**< 0: same as paths */
    int relabel_killed;
    int reproducible;          /**< omit the timestamp comment line */
} fl_experiment_config;

/** Defaults: t = {1}, 20000 paths, ks, threshold 0.03, decrease required, auto bump. */
FL_API void fl_experiment_config_init(fl_experiment_config* config);

/** *pass is 1 when every threshold holds; *failures (may be NULL) lists the others, one per line. */
FL_API fl_status fl_converge(const fl_experiment_config* config, fl_text** csv, int* pass, fl_text** failures);

/** CSV n,m,mean_visits,ci_halfwidth,bound,rescaled_occupation for walks started at 0. */
FL_API fl_status fl_occupation_scaling(const char* preset, double p1, double p2, double p3, const int64_t* n_list,
                                       size_t n_count, double t, int64_t paths, uint64_t seed, int reproducible,
                                       fl_text** out);

/**
 * Consistency of L^(n) with f''/2 for the domain function a e^{-l1 x} + b e^{-l2 x}.
 * CSV n,interior_max,boundary_residual,bound_interior,pass. *pass is 1 when every
 * interior residual is within its bound and every Taylor bound holds.
 */
FL_API fl_status fl_check_generator(const fl_params* params, fl_regime regime, double lambda1, double lambda2,
                                    const int64_t* n_list, size_t n_count, fl_text** csv, int* pass);

/**
 * Reference CDF as CSV y,cdf. law is "reflected", "absorbed", "killed" or
 * "exp_holding" (the last uses p1, p3 and starts at 0).
 */
FL_API fl_status fl_reference_csv(const char* law, double x0, double t, double p1, double p3, const double* ys,
                                  size_t count, fl_text** out);

#ifdef __cplusplus
}
#endif

#endif /* FELLERLAB_H */
