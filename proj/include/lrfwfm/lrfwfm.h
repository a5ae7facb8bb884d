// Copyright (c) 2026 The lrfwfm Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LRFWFM_LRFWFM_H_
#define LRFWFM_LRFWFM_H_

/*
 * C interface to the lrfwfm library: field-weighted factorization machines
 * with diagonal-plus-low-rank interaction matrices.
 *
 * Every function returns an lrfwfm_status. On failure the message of the
 * last error on the calling thread is available from lrfwfm_last_error().
 * Handles are opaque and released with their matching *_free function.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(LRFWFM_BUILDING_LIBRARY)
#define LRFWFM_API __attribute__((visibility("default")))
#else
#define LRFWFM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lrfwfm_status {
  LRFWFM_OK = 0,
  LRFWFM_ERR_INVALID_ARGUMENT = 1,
  LRFWFM_ERR_DATA = 2,
  LRFWFM_ERR_NUMERIC = 3,
  LRFWFM_ERR_FORMAT = 4,
  LRFWFM_ERR_IO = 5,
  LRFWFM_ERR_INTERNAL = 6
} lrfwfm_status;

typedef enum lrfwfm_kind {
  LRFWFM_KIND_FM = 0,
  LRFWFM_KIND_FWFM = 1,
  LRFWFM_KIND_PRUNED = 2,
  LRFWFM_KIND_DPLR = 3
} lrfwfm_kind;

typedef enum lrfwfm_loss { LRFWFM_LOSS_LOGLOSS = 0, LRFWFM_LOSS_MSE = 1 } lrfwfm_loss;

typedef enum lrfwfm_optimizer {
  LRFWFM_OPT_ADAM = 0,
  LRFWFM_OPT_SGD = 1
} lrfwfm_optimizer;

typedef enum lrfwfm_partition {
  LRFWFM_SPLIT_ALL = 0,
  LRFWFM_SPLIT_TRAIN = 1,
  LRFWFM_SPLIT_VALIDATION = 2,
  LRFWFM_SPLIT_TEST = 3
} lrfwfm_partition;

typedef struct lrfwfm_model lrfwfm_model;
typedef struct lrfwfm_engine lrfwfm_engine;

LRFWFM_API const char* lrfwfm_version(void);
/* Message of the most recent failure on this thread, "" if none. */
LRFWFM_API const char* lrfwfm_last_error(void);
LRFWFM_API const char* lrfwfm_status_name(lrfwfm_status status);

/* Models ---------------------------------------------------------------- */

typedef struct lrfwfm_model_info {
  lrfwfm_kind kind;
  size_t m;
  size_t context_fields;
  size_t k;
  size_t rank;       /* DPLR only */
  uint64_t keep;     /* pruned only: retained entries */
  uint64_t n;        /* total vocabulary rows */
  uint64_t parameter_count;
  uint64_t interaction_parameter_count;
  double derived_d_norm; /* DPLR only: ||d||_2 */
  int has_vocab;     /* vocabulary attached (trained models) */
} lrfwfm_model_info;

LRFWFM_API lrfwfm_status lrfwfm_model_load(const char* path, lrfwfm_model** out);
/* Also loads `<path>.vocab` when vocab_path is NULL and that file exists. */
LRFWFM_API lrfwfm_status lrfwfm_model_load_with_vocab(const char* path,
                                                      const char* vocab_path,
                                                      lrfwfm_model** out);
LRFWFM_API lrfwfm_status lrfwfm_model_save(const lrfwfm_model* model, const char* path);
/* Writes the attached vocabulary; fails if there is none. */
LRFWFM_API lrfwfm_status lrfwfm_model_save_vocab(const lrfwfm_model* model,
                                                 const char* path);
LRFWFM_API lrfwfm_status lrfwfm_model_info_get(const lrfwfm_model* model,
                                               lrfwfm_model_info* info);
LRFWFM_API void lrfwfm_model_free(lrfwfm_model* model);

/* Fresh model over `m` fields whose first `context_fields` are context. */
LRFWFM_API lrfwfm_status lrfwfm_model_init(size_t context_fields,
                                           const uint32_t* vocab_sizes, size_t m,
                                           lrfwfm_kind kind, size_t k, size_t rank,
                                           uint64_t seed, lrfwfm_model** out);

/* Training and evaluation ----------------------------------------------- */

typedef struct lrfwfm_epoch_log {
  size_t epoch;
  double train_loss;
  int has_valid;
  double valid_metric;
} lrfwfm_epoch_log;

typedef void (*lrfwfm_epoch_callback)(const lrfwfm_epoch_log* log, void* user_data);

typedef struct lrfwfm_train_config {
  const char* data_path;
  const char* schema_path;
  lrfwfm_kind variant;
  size_t rank;     /* DPLR rank or pruned rank-equivalent */
  uint64_t keep;   /* pruned keep count, overrides rank when > 0 */
  size_t dim;
  double learning_rate;
  size_t epochs;
  size_t batch_size;
  lrfwfm_loss loss;
  lrfwfm_optimizer optimizer;
  double weight_decay;
  uint64_t seed;
  int keep_best;
  size_t finetune_epochs; /* pruned only */
  lrfwfm_epoch_callback on_epoch;
  void* user_data;
} lrfwfm_train_config;

typedef struct lrfwfm_eval_report {
  size_t count;
  int has_logloss;
  double logloss;
  int has_auc;
  double auc;
  int has_mse;
  double mse;
} lrfwfm_eval_report;

typedef struct lrfwfm_train_report {
  size_t train_rows;
  size_t validation_rows;
  size_t test_rows;
  uint64_t keep;
  lrfwfm_eval_report validation;
  lrfwfm_eval_report test;
} lrfwfm_train_report;

LRFWFM_API void lrfwfm_train_config_default(lrfwfm_train_config* config);
/* Splits the data 80/10/10 with `seed`, builds vocabularies on the training
 * part and trains. The returned model carries its vocabulary. */
LRFWFM_API lrfwfm_status lrfwfm_train(const lrfwfm_train_config* config,
                                      lrfwfm_model** out,
                                      lrfwfm_train_report* report);

LRFWFM_API lrfwfm_status lrfwfm_evaluate(const lrfwfm_model* model,
                                         const char* data_path,
                                         lrfwfm_partition partition,
                                         uint64_t split_seed, lrfwfm_loss loss,
                                         lrfwfm_eval_report* report);

/* Decomposition ---------------------------------------------------------- */

LRFWFM_API uint64_t lrfwfm_rank_equivalent_keep(size_t rank, size_t m);
LRFWFM_API double lrfwfm_sparsity_percent(uint64_t keep, size_t m);

LRFWFM_API lrfwfm_status lrfwfm_prune(const lrfwfm_model* dense, uint64_t keep,
                                      lrfwfm_model** out);

typedef struct lrfwfm_decompose_report {
  size_t iterations;
  double frobenius_error;
  double conversion_error;
} lrfwfm_decompose_report;

/* Post-hoc DPLR fit of a dense FwFM (or FM) interaction matrix. */
LRFWFM_API lrfwfm_status lrfwfm_decompose(const lrfwfm_model* dense, size_t rank,
                                          size_t max_iters, double tol,
                                          lrfwfm_model** out,
                                          lrfwfm_decompose_report* report);

typedef struct lrfwfm_spectrum_report {
  double bound;
  double exact;
  double sigma_max;
} lrfwfm_spectrum_report;

/* Error spectrum of `approx` against the reference interaction matrix.
 * With data_path, the Gram matrix averages field-vector outer products over
 * the rows (using the reference model's vocabulary); otherwise it is the
 * expectation under one uniformly drawn feature per field. */
LRFWFM_API lrfwfm_status lrfwfm_spectrum_write(const lrfwfm_model* reference,
                                               const lrfwfm_model* approx,
                                               const char* data_path,
                                               const char* out_path,
                                               lrfwfm_spectrum_report* report);

/* Benchmark -------------------------------------------------------------- */

typedef struct lrfwfm_bench_grid {
  size_t m;
  const size_t* context_counts;
  size_t n_context_counts;
  const size_t* ranks;
  size_t n_ranks;
  const size_t* auction_sizes;
  size_t n_auction_sizes;
  size_t repetitions;
  size_t auctions_per_measurement;
  size_t k;
  uint64_t seed;
  int baselines;
} lrfwfm_bench_grid;

typedef struct lrfwfm_bench_report {
  size_t records;
  size_t summary_rows;
  size_t low_resolution;
} lrfwfm_bench_report;

/* Fills the default grid; list pointers reference static storage. */
LRFWFM_API void lrfwfm_bench_grid_default(lrfwfm_bench_grid* grid);
LRFWFM_API lrfwfm_status lrfwfm_bench_run(const lrfwfm_bench_grid* grid,
                                          const char* records_path,
                                          const char* summary_path,
                                          lrfwfm_bench_report* report);

/* Data ingestion --------------------------------------------------------- */

LRFWFM_API lrfwfm_status lrfwfm_ingest_movielens(const char* dir,
                                                 const char* data_out,
                                                 const char* schema_out,
                                                 size_t* rows);

/* Ranking ---------------------------------------------------------------- */

/* The engine keeps its own reference to the model's parameters. */
LRFWFM_API lrfwfm_status lrfwfm_engine_create(const lrfwfm_model* model,
                                              lrfwfm_engine** out);
LRFWFM_API void lrfwfm_engine_free(lrfwfm_engine* engine);

/* Scores `n_items` candidates for one context. Each field holds one
 * feature id local to that field: context_ids has context_fields entries,
 * item_ids has n_items * (m - context_fields) entries, row-major. */
LRFWFM_API lrfwfm_status lrfwfm_engine_score(const lrfwfm_engine* engine,
                                             const uint32_t* context_ids,
                                             const uint32_t* item_ids, size_t n_items,
                                             double* scores);

#ifdef __cplusplus
}
#endif

#endif  // LRFWFM_LRFWFM_H_
