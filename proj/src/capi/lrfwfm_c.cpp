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

#include "lrfwfm/lrfwfm.h"

#include <cmath>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "core/bench.hpp"
#include "core/decompose.hpp"
#include "core/error.hpp"
#include "core/io.hpp"
#include "core/model_io.hpp"
#include "core/movielens.hpp"
#include "core/ranking.hpp"
#include "core/workflow.hpp"

struct lrfwfm_model {
  std::shared_ptr<const lrfwfm::ModelParams> params;
  std::optional<lrfwfm::FieldSchema> vocab;
};

struct lrfwfm_engine {
  std::shared_ptr<const lrfwfm::ModelParams> params;
  std::unique_ptr<lrfwfm::RankingEngine<double>> engine;
};

namespace {

thread_local std::string g_last_error;

lrfwfm_status status_of(lrfwfm::ErrorKind kind) {
  switch (kind) {
    case lrfwfm::ErrorKind::kInvalidArgument: return LRFWFM_ERR_INVALID_ARGUMENT;
    case lrfwfm::ErrorKind::kData: return LRFWFM_ERR_DATA;
    case lrfwfm::ErrorKind::kNumeric: return LRFWFM_ERR_NUMERIC;
    case lrfwfm::ErrorKind::kFormat: return LRFWFM_ERR_FORMAT;
    case lrfwfm::ErrorKind::kIo: return LRFWFM_ERR_IO;
  }
  return LRFWFM_ERR_INTERNAL;
}

template <class Fn>
lrfwfm_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return LRFWFM_OK;
  } catch (const lrfwfm::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return LRFWFM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LRFWFM_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) lrfwfm::throw_invalid(std::string(what) + " is NULL");
}

std::string path_arg(const char* p, const char* what) {
  require(p, what);
  if (*p == '\0') lrfwfm::throw_invalid(std::string(what) + " is empty");
  return p;
}

lrfwfm_model* wrap(lrfwfm::ModelParams params,
                   std::optional<lrfwfm::FieldSchema> vocab = std::nullopt) {
  auto* m = new lrfwfm_model;
  m->params = std::make_shared<const lrfwfm::ModelParams>(std::move(params));
  m->vocab = std::move(vocab);
  return m;
}

lrfwfm_eval_report to_c(const lrfwfm::EvalReport& r) {
  lrfwfm_eval_report out{};
  out.count = r.count;
  out.has_logloss = r.logloss.has_value();
  out.logloss = r.logloss.value_or(0.0);
  out.has_auc = r.auc.has_value();
  out.auc = r.auc.value_or(0.0);
  out.has_mse = r.mse.has_value();
  out.mse = r.mse.value_or(0.0);
  return out;
}

lrfwfm::ModelKind kind_from_c(lrfwfm_kind k) {
  switch (k) {
    case LRFWFM_KIND_FM: return lrfwfm::ModelKind::kFm;
    case LRFWFM_KIND_FWFM: return lrfwfm::ModelKind::kFwFm;
    case LRFWFM_KIND_PRUNED: return lrfwfm::ModelKind::kPruned;
    case LRFWFM_KIND_DPLR: return lrfwfm::ModelKind::kDplr;
  }
  lrfwfm::throw_invalid("unknown model kind " + std::to_string(static_cast<int>(k)));
}

lrfwfm::LossKind loss_from_c(lrfwfm_loss l) {
  if (l == LRFWFM_LOSS_LOGLOSS) return lrfwfm::LossKind::kLogLoss;
  if (l == LRFWFM_LOSS_MSE) return lrfwfm::LossKind::kMse;
  lrfwfm::throw_invalid("unknown loss " + std::to_string(static_cast<int>(l)));
}

// Dense reference matrix of a model that pruning or decomposition starts from.
const lrfwfm::linalg::Mat reference_r(const lrfwfm::ModelParams& p) {
  const auto kind = p.kind();
  if (kind != lrfwfm::ModelKind::kFwFm && kind != lrfwfm::ModelKind::kFm) {
    lrfwfm::throw_invalid("expected a dense FwFM or FM model, got " + lrfwfm::to_string(kind));
  }
  return lrfwfm::materialize_r(p.interaction, p.layout.m());
}

const std::size_t kDefaultContexts[] = {10, 15, 20, 25, 30};
const std::size_t kDefaultRanks[] = {1, 2, 3};
const std::size_t kDefaultSizes[] = {10, 50, 100, 500, 1000};

}  // namespace

extern "C" {

const char* lrfwfm_version(void) { return "1.0.0"; }

const char* lrfwfm_last_error(void) { return g_last_error.c_str(); }

const char* lrfwfm_status_name(lrfwfm_status status) {
  switch (status) {
    case LRFWFM_OK: return "ok";
    case LRFWFM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LRFWFM_ERR_DATA: return "data error";
    case LRFWFM_ERR_NUMERIC: return "numeric failure";
    case LRFWFM_ERR_FORMAT: return "format error";
    case LRFWFM_ERR_IO: return "i/o error";
    case LRFWFM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

lrfwfm_status lrfwfm_model_load(const char* path, lrfwfm_model** out) {
  return lrfwfm_model_load_with_vocab(path, nullptr, out);
}

lrfwfm_status lrfwfm_model_load_with_vocab(const char* path, const char* vocab_path,
                                           lrfwfm_model** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    const std::string p = path_arg(path, "path");
    auto params = lrfwfm::load_model(p);
    std::optional<lrfwfm::FieldSchema> vocab;
    if (vocab_path != nullptr) {
      vocab = lrfwfm::read_vocab_file(vocab_path);
    } else if (std::filesystem::exists(p + ".vocab")) {
      vocab = lrfwfm::read_vocab_file(p + ".vocab");
    }
    *out = wrap(std::move(params), std::move(vocab));
  });
}

lrfwfm_status lrfwfm_model_save(const lrfwfm_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    lrfwfm::save_model(path_arg(path, "path"), *model->params);
  });
}

lrfwfm_status lrfwfm_model_save_vocab(const lrfwfm_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    if (!model->vocab) lrfwfm::throw_invalid("model has no vocabulary attached");
    lrfwfm::write_vocab_file(path_arg(path, "path"), *model->vocab);
  });
}

lrfwfm_status lrfwfm_model_info_get(const lrfwfm_model* model, lrfwfm_model_info* info) {
  return guarded([&] {
    require(model, "model");
    require(info, "info");
    const auto& p = *model->params;
    *info = lrfwfm_model_info{};
    info->kind = static_cast<lrfwfm_kind>(p.kind());
    info->m = p.layout.m();
    info->context_fields = p.layout.context_fields();
    info->k = p.k;
    info->n = p.layout.n();
    info->parameter_count = p.parameter_count();
    info->interaction_parameter_count = p.interaction_parameter_count();
    info->has_vocab = model->vocab.has_value();
    if (const auto* d = std::get_if<lrfwfm::Dplr>(&p.interaction)) {
      info->rank = d->rank();
      double s = 0.0;
      for (double x : d->d) s += x * x;
      info->derived_d_norm = std::sqrt(s);
    } else if (const auto* q = std::get_if<lrfwfm::PrunedSparse>(&p.interaction)) {
      info->keep = q->entries.size();
    }
  });
}

void lrfwfm_model_free(lrfwfm_model* model) { delete model; }

lrfwfm_status lrfwfm_model_init(size_t context_fields, const uint32_t* vocab_sizes,
                                size_t m, lrfwfm_kind kind, size_t k, size_t rank,
                                uint64_t seed, lrfwfm_model** out) {
  return guarded([&] {
    require(out, "out");
    require(vocab_sizes, "vocab_sizes");
    *out = nullptr;
    const lrfwfm::FieldLayout layout(context_fields,
                                     std::vector<std::uint32_t>(vocab_sizes, vocab_sizes + m));
    lrfwfm::InitOptions opt;
    opt.kind = kind_from_c(kind);
    opt.k = k;
    opt.rank = rank;
    opt.seed = seed;
    *out = wrap(lrfwfm::init_model(layout, opt));
  });
}

void lrfwfm_train_config_default(lrfwfm_train_config* c) {
  if (c == nullptr) return;
  const lrfwfm::TrainConfig d;
  *c = lrfwfm_train_config{};
  c->variant = LRFWFM_KIND_FM;
  c->rank = 2;
  c->dim = 8;
  c->learning_rate = d.learning_rate;
  c->epochs = d.epochs;
  c->batch_size = d.batch_size;
  c->loss = LRFWFM_LOSS_LOGLOSS;
  c->optimizer = LRFWFM_OPT_ADAM;
  c->weight_decay = d.weight_decay;
  c->seed = d.seed;
  c->finetune_epochs = 1;
}

lrfwfm_status lrfwfm_train(const lrfwfm_train_config* c, lrfwfm_model** out,
                           lrfwfm_train_report* report) {
  return guarded([&] {
    require(c, "config");
    require(out, "out");
    *out = nullptr;
    lrfwfm::TrainRequest req;
    req.data_path = path_arg(c->data_path, "data_path");
    req.schema_path = path_arg(c->schema_path, "schema_path");
    req.variant = kind_from_c(c->variant);
    req.rank = c->rank;
    req.keep = c->keep;
    req.k = c->dim;
    req.split_seed = c->seed;
    req.finetune_epochs = c->finetune_epochs;
    req.config.loss = loss_from_c(c->loss);
    req.config.learning_rate = c->learning_rate;
    req.config.epochs = c->epochs;
    req.config.batch_size = c->batch_size;
    if (c->optimizer != LRFWFM_OPT_ADAM && c->optimizer != LRFWFM_OPT_SGD) {
      lrfwfm::throw_invalid("unknown optimizer");
    }
    req.config.optimizer = c->optimizer == LRFWFM_OPT_SGD ? lrfwfm::OptimizerKind::kSgd
                                                          : lrfwfm::OptimizerKind::kAdam;
    req.config.weight_decay = c->weight_decay;
    req.config.seed = c->seed;
    req.config.keep_best = c->keep_best != 0;
    lrfwfm::EpochCallback cb;
    if (c->on_epoch != nullptr) {
      cb = [c](const lrfwfm::EpochLog& log) {
        lrfwfm_epoch_log cl{log.epoch, log.train_loss, log.valid_metric.has_value(),
                            log.valid_metric.value_or(0.0)};
        c->on_epoch(&cl, c->user_data);
      };
    }
    auto outcome = lrfwfm::run_training(req, cb);
    if (report != nullptr) {
      *report = lrfwfm_train_report{};
      report->train_rows = outcome.train_rows;
      report->validation_rows = outcome.validation_rows;
      report->test_rows = outcome.test_rows;
      report->keep = outcome.keep;
      report->validation = to_c(outcome.validation);
      report->test = to_c(outcome.test);
    }
    *out = wrap(std::move(outcome.model), std::move(outcome.vocab));
  });
}

lrfwfm_status lrfwfm_evaluate(const lrfwfm_model* model, const char* data_path,
                              lrfwfm_partition partition, uint64_t split_seed,
                              lrfwfm_loss loss, lrfwfm_eval_report* report) {
  return guarded([&] {
    require(model, "model");
    require(report, "report");
    if (!model->vocab) {
      lrfwfm::throw_data("model has no vocabulary; pass the .vocab file written by train");
    }
    lrfwfm::Partition part;
    switch (partition) {
      case LRFWFM_SPLIT_ALL: part = lrfwfm::Partition::kAll; break;
      case LRFWFM_SPLIT_TRAIN: part = lrfwfm::Partition::kTrain; break;
      case LRFWFM_SPLIT_VALIDATION: part = lrfwfm::Partition::kValidation; break;
      case LRFWFM_SPLIT_TEST: part = lrfwfm::Partition::kTest; break;
      default: lrfwfm::throw_invalid("unknown partition");
    }
    *report = to_c(lrfwfm::run_evaluation(*model->params, *model->vocab,
                                          path_arg(data_path, "data_path"), part,
                                          split_seed, loss_from_c(loss)));
  });
}

uint64_t lrfwfm_rank_equivalent_keep(size_t rank, size_t m) {
  return lrfwfm::rank_equivalent_keep(rank, m);
}

double lrfwfm_sparsity_percent(uint64_t keep, size_t m) {
  return m < 2 ? 0.0 : lrfwfm::sparsity_percent(keep, m);
}

lrfwfm_status lrfwfm_prune(const lrfwfm_model* dense, uint64_t keep, lrfwfm_model** out) {
  return guarded([&] {
    require(dense, "model");
    require(out, "out");
    *out = nullptr;
    const auto r = reference_r(*dense->params);
    auto pruned = lrfwfm::with_interaction(*dense->params,
                                           lrfwfm::prune(lrfwfm::DenseSym{r}, keep));
    *out = wrap(std::move(pruned), dense->vocab);
  });
}

lrfwfm_status lrfwfm_decompose(const lrfwfm_model* dense, size_t rank, size_t max_iters,
                               double tol, lrfwfm_model** out,
                               lrfwfm_decompose_report* report) {
  return guarded([&] {
    require(dense, "model");
    require(out, "out");
    *out = nullptr;
    const auto r = reference_r(*dense->params);
    auto fit = lrfwfm::posthoc_dplr(r, rank, max_iters, tol);
    if (report != nullptr) {
      report->iterations = fit.iterations;
      report->frobenius_error = fit.error;
      report->conversion_error = fit.conversion_error;
    }
    auto model = lrfwfm::with_interaction(*dense->params, std::move(fit.dplr));
    lrfwfm::round_to_storage(model);
    *out = wrap(std::move(model), dense->vocab);
  });
}

lrfwfm_status lrfwfm_spectrum_write(const lrfwfm_model* reference,
                                    const lrfwfm_model* approx, const char* data_path,
                                    const char* out_path,
                                    lrfwfm_spectrum_report* report) {
  return guarded([&] {
    require(reference, "reference");
    require(approx, "approx");
    const auto& ref = *reference->params;
    const auto r = reference_r(ref);
    if (approx->params->layout.m() != ref.layout.m()) {
      lrfwfm::throw_invalid("models have different field counts");
    }
    lrfwfm::linalg::Mat gram;
    if (data_path != nullptr) {
      if (!reference->vocab) lrfwfm::throw_data("reference model has no vocabulary");
      const auto rows = lrfwfm::read_rows_file(data_path, *reference->vocab);
      const auto samples = lrfwfm::encode_rows(rows, *reference->vocab);
      if (samples.empty()) lrfwfm::throw_data(std::string(data_path) + ": no rows");
      const std::size_t m = ref.layout.m();
      gram = lrfwfm::linalg::Mat(m, m);
      for (const auto& s : samples) {
        const auto fv = lrfwfm::gather_field_vectors<double>(s, ref);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < m; ++j)
            gram(i, j) += lrfwfm::dot<double>(fv.row(i), fv.row(j)) /
                          static_cast<double>(samples.size());
      }
    } else {
      gram = lrfwfm::expected_field_gram(ref);
    }
    const auto rep = lrfwfm::error_spectrum_gram(r, approx->params->interaction, gram);
    lrfwfm::write_file(path_arg(out_path, "out_path"), lrfwfm::format_spectrum(rep));
    if (report != nullptr) {
      report->bound = rep.bound;
      report->exact = rep.exact;
      report->sigma_max = rep.sigma_error.empty() ? 0.0 : rep.sigma_error.front();
    }
  });
}

void lrfwfm_bench_grid_default(lrfwfm_bench_grid* g) {
  if (g == nullptr) return;
  const lrfwfm::BenchGrid d;
  *g = lrfwfm_bench_grid{};
  g->m = d.m;
  g->context_counts = kDefaultContexts;
  g->n_context_counts = std::size(kDefaultContexts);
  g->ranks = kDefaultRanks;
  g->n_ranks = std::size(kDefaultRanks);
  g->auction_sizes = kDefaultSizes;
  g->n_auction_sizes = std::size(kDefaultSizes);
  g->repetitions = d.repetitions;
  g->auctions_per_measurement = d.auctions_per_measurement;
  g->k = d.k;
  g->seed = d.seed;
  g->baselines = d.baselines;
}

lrfwfm_status lrfwfm_bench_run(const lrfwfm_bench_grid* g, const char* records_path,
                               const char* summary_path, lrfwfm_bench_report* report) {
  return guarded([&] {
    require(g, "grid");
    auto list = [](const size_t* p, size_t n, const char* what) {
      if (n > 0) require(p, what);
      return std::vector<std::size_t>(p, p + n);
    };
    lrfwfm::BenchGrid grid;
    grid.m = g->m;
    grid.context_counts = list(g->context_counts, g->n_context_counts, "context_counts");
    grid.ranks = list(g->ranks, g->n_ranks, "ranks");
    grid.auction_sizes = list(g->auction_sizes, g->n_auction_sizes, "auction_sizes");
    grid.repetitions = g->repetitions;
    grid.auctions_per_measurement = g->auctions_per_measurement;
    grid.k = g->k;
    grid.seed = g->seed;
    grid.baselines = g->baselines != 0;
    const auto records = lrfwfm::run_grid(grid);
    const auto summary = lrfwfm::summarize(records);
    lrfwfm::write_file(path_arg(records_path, "records_path"), lrfwfm::format_records(records));
    if (summary_path != nullptr) lrfwfm::write_file(summary_path, lrfwfm::format_summary(summary));
    if (report != nullptr) {
      report->records = records.size();
      report->summary_rows = summary.size();
      report->low_resolution = 0;
      for (const auto& r : records) report->low_resolution += r.low_resolution ? 1 : 0;
    }
  });
}

lrfwfm_status lrfwfm_ingest_movielens(const char* dir, const char* data_out,
                                      const char* schema_out, size_t* rows) {
  return guarded([&] {
    const auto res = lrfwfm::ingest_movielens(path_arg(dir, "dir"),
                                              path_arg(data_out, "data_out"),
                                              path_arg(schema_out, "schema_out"));
    if (rows != nullptr) *rows = res.rows;
  });
}

lrfwfm_status lrfwfm_engine_create(const lrfwfm_model* model, lrfwfm_engine** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = nullptr;
    auto e = std::make_unique<lrfwfm_engine>();
    e->params = model->params;
    e->engine = std::make_unique<lrfwfm::RankingEngine<double>>(*e->params);
    *out = e.release();
  });
}

void lrfwfm_engine_free(lrfwfm_engine* engine) { delete engine; }

lrfwfm_status lrfwfm_engine_score(const lrfwfm_engine* engine, const uint32_t* context_ids,
                                  const uint32_t* item_ids, size_t n_items,
                                  double* scores) {
  return guarded([&] {
    require(engine, "engine");
    require(context_ids, "context_ids");
    if (n_items == 0) lrfwfm::throw_data("auction has no items");
    require(item_ids, "item_ids");
    require(scores, "scores");
    const auto& eng = *engine->engine;
    const std::size_t m_c = eng.context_fields();
    const std::size_t m_i = eng.item_fields();
    lrfwfm::Auction auction;
    for (std::size_t f = 0; f < m_c; ++f) auction.context.add_single(context_ids[f]);
    auction.items.resize(n_items);
    for (std::size_t i = 0; i < n_items; ++i)
      for (std::size_t f = 0; f < m_i; ++f) auction.items[i].add_single(item_ids[i * m_i + f]);
    const auto out = eng.score_auction(auction);
    std::copy(out.begin(), out.end(), scores);
  });
}

}  // extern "C"
