/* C interface to the blockstep library. */
#ifndef BLOCKSTEP_H
#define BLOCKSTEP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef BLOCKSTEP_BUILDING
#    define BS_API __declspec(dllexport)
#  else
#    define BS_API __declspec(dllimport)
#  endif
#else
#  define BS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bs_status {
  BS_OK = 0,
  BS_BAD_SHAPE,
  BS_RANK_DEFICIENT,
  BS_NOT_SYMMETRIC,
  BS_SINGULAR,
  BS_BAD_STEPSIZE,
  BS_OUT_OF_RANGE,
  BS_BAD_SPECTRUM,
  BS_TOO_FEW,
  BS_NOT_BWO,
  BS_NOT_ORTHONORMAL,
  BS_INSUFFICIENT_TAIL,
  BS_IO,
  BS_PARSE,
  BS_INVALID_ARGUMENT,
  BS_INTERNAL
} bs_status;

typedef enum bs_method {
  BS_GD = 0,
  BS_HB,
  BS_BGD,
  BS_BEM,
  BS_AP,
  BS_DR,
  BS_RAP,
  BS_PRAP,
  BS_GDR,
  BS_GAP,
  BS_GAPXX
} bs_method;

typedef struct bs_problem bs_problem;
typedef struct bs_trace bs_trace;
typedef struct bs_pair bs_pair;

/* Name of a status code, e.g. "RankDeficient". */
BS_API const char* bs_status_name(bs_status status);
/* Message of the most recent failure on the calling thread. */
BS_API const char* bs_last_error(void);
/* Releases strings returned through char** out-parameters. */
BS_API void bs_string_free(char* s);

BS_API const char* bs_method_name(bs_method method);
BS_API bs_status bs_method_from_name(const char* name, bs_method* out);

/* ---- problems ---- */

typedef struct bs_gen_spec {
  size_t m, n1, n2;
  double noise_level;
  double cond_num;
  uint64_t seed;
  size_t rank; /* 0 selects min(n1, n2) */
} bs_gen_spec;

typedef struct bs_problem_info {
  size_t m, n1, n2, r;
  int assumes_bwo;
  double gram_dev1, gram_dev2;
  double lambda1;
  double ata_max, ata_min, kappa;
  int has_seed;
  uint64_t seed;
} bs_problem_info;

BS_API void bs_gen_spec_default(bs_gen_spec* spec);
BS_API bs_status bs_problem_generate(const bs_gen_spec* spec, bs_problem** out);
BS_API bs_status bs_problem_two_column(double c, uint64_t seed, bs_problem** out);
/* Row-major blocks; seed may be NULL. */
BS_API bs_status bs_problem_create(size_t m, size_t n1, size_t n2, const double* a1, const double* a2,
                                   const double* y, const uint64_t* seed, bs_problem** out);
BS_API bs_status bs_problem_load(const char* path, bs_problem** out);
BS_API bs_status bs_problem_from_json(const char* text, bs_problem** out);
BS_API bs_status bs_problem_save(const bs_problem* p, const char* path);
BS_API bs_status bs_problem_to_json(const bs_problem* p, char** out);
BS_API bs_status bs_problem_info_get(const bs_problem* p, bs_problem_info* out);
/* Copies up to cap nonzero eigenvalues of C C' (descending); *count gets r. */
BS_API bs_status bs_problem_lambdas(const bs_problem* p, double* out, size_t cap, size_t* count);
BS_API void bs_problem_free(bs_problem* p);

/* ---- stepsizes and spectra ---- */

typedef struct bs_plan {
  bs_method method;
  double gamma;          /* GD */
  double alpha, beta;    /* HB */
  double gamma1, gamma2; /* BGD, BEM */
  double predicted_rho;
} bs_plan;

BS_API bs_status bs_plan_optimal(const bs_problem* p, bs_method method, bs_plan* out);
/* Recomputes predicted_rho for the stepsizes in plan. */
BS_API bs_status bs_plan_evaluate(const bs_problem* p, bs_plan* plan);
BS_API bs_status bs_plan_to_json(const bs_plan* plan, char** out);
/* Closed-form spectrum of M(gamma1, gamma2); requires block-wise orthogonality. */
BS_API bs_status bs_spectrum_json(const bs_problem* p, double gamma1, double gamma2, char** out);

/* ---- solvers ---- */

BS_API bs_status bs_solve(const bs_problem* p, const bs_plan* plan, size_t iters, bs_trace** out);
/* Orthogonalize each block, run optimal BGD, map back. residual_gap gets
   | ||Ax - y|| - ||Ax* - y|| | and may be NULL. */
BS_API bs_status bs_solve_block_qr(const bs_problem* p, size_t iters, bs_trace** out, double* residual_gap);

typedef struct bs_rate {
  double rho_hat;
  size_t window_begin, window_end;
  double residual;
  int diverging;
} bs_rate;

BS_API size_t bs_trace_length(const bs_trace* t);
BS_API const double* bs_trace_errors(const bs_trace* t);
BS_API double bs_trace_wall_seconds(const bs_trace* t);
BS_API void bs_trace_set_seed(bs_trace* t, uint64_t seed);
BS_API void bs_trace_set_method(bs_trace* t, bs_method method);
BS_API bs_status bs_trace_rate(const bs_trace* t, double window_fraction, bs_rate* out);
BS_API bs_status bs_trace_to_csv(const bs_trace* t, int header, char** out);
/* Parses trace CSV text and returns the number of rows; schema violations give BS_PARSE. */
BS_API bs_status bs_trace_csv_validate(const char* text, size_t* rows);
BS_API void bs_trace_free(bs_trace* t);

/* ---- subspace pairs and projection methods ---- */

typedef struct bs_proj_params {
  double gamma, gamma1, gamma2;
} bs_proj_params;

typedef struct bs_rate_table {
  double ap, dr, rap, prap, gdr, gap, gapxx;
} bs_rate_table;

/* angles may be NULL (random pair); otherwise n_angles must equal min(n1, n2). */
BS_API bs_status bs_pair_generate(size_t m, size_t n1, size_t n2, const double* angles, size_t n_angles,
                                  uint64_t seed, bs_pair** out);
BS_API bs_status bs_pair_angles(const bs_pair* pair, double* out, size_t cap, size_t* count);
BS_API size_t bs_pair_rank(const bs_pair* pair);
BS_API int bs_pair_full_rank(const bs_pair* pair);
/* Tabulated optimal parameters and rate for a projection method (BS_AP .. BS_GAPXX). */
BS_API bs_status bs_pair_tabulated(const bs_pair* pair, bs_method method, bs_proj_params* params, double* rate);
/* Iterates the operator from a standard normal z0 drawn from z0_seed. */
BS_API bs_status bs_pair_run(const bs_pair* pair, bs_method method, const bs_proj_params* params, size_t iters,
                             uint64_t z0_seed, bs_trace** out);
/* Contraction factor on the off-intersection component by renormalized power iteration. */
BS_API bs_status bs_pair_contraction(const bs_pair* pair, bs_method method, const bs_proj_params* params,
                                     size_t iters, uint64_t z0_seed, bs_rate* out);
BS_API void bs_pair_free(bs_pair* pair);

BS_API bs_status bs_rate_table_compute(double theta1, double theta_r, bs_rate_table* out);

#ifdef __cplusplus
}
#endif

#endif
