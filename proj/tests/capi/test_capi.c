/*
 * Copyright (c) 2026 The lrfwfm Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
/* Exercises the shared library through its C header only. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "lrfwfm/lrfwfm.h"

static int failures = 0;

#define EXPECT(cond)                                                  \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: expected %s (%s)\n", __FILE__, __LINE__, \
              #cond, lrfwfm_last_error());                            \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

static const char* tmp_path(const char* name) {
  static char buf[8][512];
  static int slot = 0;
  const char* dir = getenv("TMPDIR");
  char* out = buf[slot++ % 8];
  snprintf(out, sizeof buf[0], "%s/lrfwfm_capi_%s", dir ? dir : "/tmp", name);
  return out;
}

static void test_model_lifecycle(void) {
  const uint32_t vocab[4] = {3, 4, 5, 2};
  lrfwfm_model* model = NULL;
  lrfwfm_model_info info;
  EXPECT(lrfwfm_model_init(2, vocab, 4, LRFWFM_KIND_DPLR, 4, 2, 11, &model) == LRFWFM_OK);
  EXPECT(lrfwfm_model_info_get(model, &info) == LRFWFM_OK);
  EXPECT(info.kind == LRFWFM_KIND_DPLR);
  EXPECT(info.m == 4 && info.context_fields == 2 && info.k == 4 && info.rank == 2);
  EXPECT(info.n == 14);
  EXPECT(info.interaction_parameter_count == 2 * 5);
  EXPECT(info.parameter_count == 1 + 14 + 14 * 4 + 10);
  EXPECT(info.derived_d_norm > 0.0);
  EXPECT(!info.has_vocab);

  const char* path = tmp_path("model.bin");
  EXPECT(lrfwfm_model_save(model, path) == LRFWFM_OK);
  lrfwfm_model* loaded = NULL;
  EXPECT(lrfwfm_model_load(path, &loaded) == LRFWFM_OK);
  EXPECT(lrfwfm_model_info_get(loaded, &info) == LRFWFM_OK);
  EXPECT(info.rank == 2);

  lrfwfm_engine* engine = NULL;
  EXPECT(lrfwfm_engine_create(loaded, &engine) == LRFWFM_OK);
  lrfwfm_model_free(loaded); /* the engine keeps its own reference */
  const uint32_t context[2] = {1, 2};
  const uint32_t items[6] = {0, 1, 3, 0, 4, 1};
  double scores[3];
  EXPECT(lrfwfm_engine_score(engine, context, items, 3, scores) == LRFWFM_OK);
  EXPECT(isfinite(scores[0]) && isfinite(scores[1]) && isfinite(scores[2]));
  const uint32_t bad[2] = {0, 9};
  EXPECT(lrfwfm_engine_score(engine, context, bad, 1, scores) == LRFWFM_ERR_DATA);
  lrfwfm_engine_free(engine);

  /* A corrupted magic byte must be rejected. */
  FILE* f = fopen(path, "r+b");
  EXPECT(f != NULL);
  if (f) {
    fputc('X', f);
    fclose(f);
  }
  loaded = NULL;
  EXPECT(lrfwfm_model_load(path, &loaded) == LRFWFM_ERR_FORMAT);
  EXPECT(loaded == NULL);
  EXPECT(strlen(lrfwfm_last_error()) > 0);
  EXPECT(lrfwfm_model_load(tmp_path("does-not-exist"), &loaded) == LRFWFM_ERR_IO);
  remove(path);
  lrfwfm_model_free(model);
}

static void test_decomposition(void) {
  const uint32_t vocab[5] = {2, 2, 2, 2, 2};
  lrfwfm_model* fm = NULL;
  lrfwfm_model* dplr = NULL;
  lrfwfm_model* pruned = NULL;
  lrfwfm_decompose_report rep;
  lrfwfm_model_info info;
  EXPECT(lrfwfm_model_init(2, vocab, 5, LRFWFM_KIND_FM, 3, 1, 5, &fm) == LRFWFM_OK);
  EXPECT(lrfwfm_decompose(fm, 1, 1000, 1e-14, &dplr, &rep) == LRFWFM_OK);
  EXPECT(rep.frobenius_error <= 1e-8);
  EXPECT(lrfwfm_decompose(fm, 6, 10, 1e-12, &pruned, &rep) == LRFWFM_ERR_INVALID_ARGUMENT);

  EXPECT(lrfwfm_prune(fm, 4, &pruned) == LRFWFM_OK);
  EXPECT(lrfwfm_model_info_get(pruned, &info) == LRFWFM_OK);
  EXPECT(info.kind == LRFWFM_KIND_PRUNED && info.keep == 4);
  lrfwfm_model* again = NULL;
  EXPECT(lrfwfm_prune(fm, 11, &again) == LRFWFM_ERR_INVALID_ARGUMENT);
  EXPECT(lrfwfm_prune(dplr, 2, &again) == LRFWFM_ERR_INVALID_ARGUMENT);

  lrfwfm_spectrum_report sr;
  const char* out = tmp_path("spectrum.csv");
  EXPECT(lrfwfm_spectrum_write(fm, pruned, NULL, out, &sr) == LRFWFM_OK);
  EXPECT(sr.exact <= sr.bound + 1e-9);
  EXPECT(sr.sigma_max > 0.0);
  remove(out);

  EXPECT(lrfwfm_rank_equivalent_keep(3, 39) == 120);
  EXPECT(fabs(lrfwfm_sparsity_percent(34, 33) - 100.0 * 68.0 / 1056.0) < 1e-12);
  lrfwfm_model_free(fm);
  lrfwfm_model_free(dplr);
  lrfwfm_model_free(pruned);
}

static void test_bench(void) {
  lrfwfm_bench_grid grid;
  lrfwfm_bench_grid_default(&grid);
  EXPECT(grid.m == 40 && grid.repetitions == 50 && grid.n_context_counts == 5);
  const size_t contexts[1] = {4};
  const size_t ranks[1] = {2};
  const size_t sizes[2] = {5, 20};
  grid.m = 8;
  grid.context_counts = contexts;
  grid.n_context_counts = 1;
  grid.ranks = ranks;
  grid.n_ranks = 1;
  grid.auction_sizes = sizes;
  grid.n_auction_sizes = 2;
  grid.repetitions = 2;
  grid.auctions_per_measurement = 1;
  lrfwfm_bench_report rep;
  const char* records = tmp_path("bench.csv");
  EXPECT(lrfwfm_bench_run(&grid, records, NULL, &rep) == LRFWFM_OK);
  EXPECT(rep.records == 8 && rep.summary_rows == 4);
  remove(records);
  grid.repetitions = 0;
  EXPECT(lrfwfm_bench_run(&grid, records, NULL, &rep) == LRFWFM_ERR_INVALID_ARGUMENT);
}

static void test_errors(void) {
  lrfwfm_model* model = NULL;
  EXPECT(lrfwfm_model_load(NULL, &model) == LRFWFM_ERR_INVALID_ARGUMENT);
  EXPECT(lrfwfm_model_info_get(NULL, NULL) == LRFWFM_ERR_INVALID_ARGUMENT);
  EXPECT(strcmp(lrfwfm_status_name(LRFWFM_ERR_NUMERIC), "numeric failure") == 0);
  EXPECT(strlen(lrfwfm_version()) > 0);
  lrfwfm_train_config config;
  lrfwfm_train_config_default(&config);
  EXPECT(config.dim == 8 && config.batch_size == 256);
  lrfwfm_train_report report;
  EXPECT(lrfwfm_train(&config, &model, &report) == LRFWFM_ERR_INVALID_ARGUMENT);
  lrfwfm_model_free(NULL);
  lrfwfm_engine_free(NULL);
}

int main(void) {
  test_model_lifecycle();
  test_decomposition();
  test_bench();
  test_errors();
  if (failures) {
    fprintf(stderr, "%d expectation(s) failed\n", failures);
    return 1;
  }
  printf("capi: all checks passed\n");
  return 0;
}
