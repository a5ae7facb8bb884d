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

// lrfwfm command-line tool. Links only against the C API.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lrfwfm/lrfwfm.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int exit_code(lrfwfm_status s) {
  switch (s) {
    case LRFWFM_OK: return kExitOk;
    case LRFWFM_ERR_INVALID_ARGUMENT: return kExitUsage;
    case LRFWFM_ERR_DATA:
    case LRFWFM_ERR_FORMAT:
    case LRFWFM_ERR_IO: return kExitData;
    case LRFWFM_ERR_NUMERIC: return kExitNumeric;
    case LRFWFM_ERR_INTERNAL: break;
  }
  return 1;
}

struct Failure {
  int code;
};

void check(lrfwfm_status s) {
  if (s != LRFWFM_OK) {
    std::fprintf(stderr, "error: %s: %s\n", lrfwfm_status_name(s), lrfwfm_last_error());
    throw Failure{exit_code(s)};
  }
}

[[noreturn]] void fail(int code, const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  throw Failure{code};
}

// Owning wrapper for model handles.
class Model {
 public:
  Model() = default;
  explicit Model(lrfwfm_model* h) : h_(h) {}
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&& o) noexcept : h_(o.h_) { o.h_ = nullptr; }
  ~Model() { lrfwfm_model_free(h_); }
  lrfwfm_model* get() const { return h_; }
  lrfwfm_model** out() {
    lrfwfm_model_free(h_);
    h_ = nullptr;
    return &h_;
  }

 private:
  lrfwfm_model* h_ = nullptr;
};

Model load(const std::string& path, const std::string& vocab = "") {
  Model m;
  check(lrfwfm_model_load_with_vocab(path.c_str(), vocab.empty() ? nullptr : vocab.c_str(),
                                     m.out()));
  return m;
}

const char* kind_name(lrfwfm_kind k) {
  switch (k) {
    case LRFWFM_KIND_FM: return "FM";
    case LRFWFM_KIND_FWFM: return "FwFM";
    case LRFWFM_KIND_PRUNED: return "Pruned";
    case LRFWFM_KIND_DPLR: return "DPLR";
  }
  return "?";
}

lrfwfm_kind parse_variant(const std::string& s) {
  if (s == "fm") return LRFWFM_KIND_FM;
  if (s == "fwfm") return LRFWFM_KIND_FWFM;
  if (s == "pruned") return LRFWFM_KIND_PRUNED;
  return LRFWFM_KIND_DPLR;
}

lrfwfm_loss parse_loss(const std::string& s) {
  return s == "mse" ? LRFWFM_LOSS_MSE : LRFWFM_LOSS_LOGLOSS;
}

lrfwfm_partition parse_split(const std::string& s) {
  if (s == "train") return LRFWFM_SPLIT_TRAIN;
  if (s == "validation") return LRFWFM_SPLIT_VALIDATION;
  if (s == "test") return LRFWFM_SPLIT_TEST;
  return LRFWFM_SPLIT_ALL;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(xs[i]);
  }
  return out;
}

void print_config(const char* cmd,
                  const std::vector<std::pair<std::string, std::string>>& kv) {
  std::printf("config: command=%s", cmd);
  for (const auto& [k, v] : kv) std::printf(" %s=%s", k.c_str(), v.c_str());
  std::printf("\n");
}

std::string fixed4(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

// Prints the metrics of a report; fails when logloss lacks an AUC.
void print_metrics(const char* prefix, const lrfwfm_eval_report& r, bool require_auc) {
  std::printf("%s count=%zu", prefix, r.count);
  if (r.has_logloss) std::printf(" logloss=%.4f", r.logloss);
  if (r.has_auc) std::printf(" auc=%.4f", r.auc);
  if (r.has_mse) std::printf(" mse=%.4f", r.mse);
  std::printf("\n");
  if (require_auc && r.has_logloss && !r.has_auc) {
    fail(kExitData, std::string(prefix) + ": AUC is undefined, only one class present");
  }
}

void print_info(const lrfwfm_model_info& info) {
  std::printf("kind=%s\n", kind_name(info.kind));
  std::printf("m=%zu\n", info.m);
  std::printf("context_fields=%zu\n", info.context_fields);
  std::printf("item_fields=%zu\n", info.m - info.context_fields);
  std::printf("k=%zu\n", info.k);
  if (info.kind == LRFWFM_KIND_DPLR) std::printf("rank=%zu\n", info.rank);
  if (info.kind == LRFWFM_KIND_PRUNED) {
    std::printf("keep=%llu\n", static_cast<unsigned long long>(info.keep));
    std::printf("sparsity=%.4f\n", lrfwfm_sparsity_percent(info.keep, info.m));
  }
  std::printf("n=%llu\n", static_cast<unsigned long long>(info.n));
  std::printf("parameters=%llu\n", static_cast<unsigned long long>(info.parameter_count));
  std::printf("interaction_parameters=%llu\n",
              static_cast<unsigned long long>(info.interaction_parameter_count));
  if (info.kind == LRFWFM_KIND_DPLR) std::printf("derived_d_norm=%.4f\n", info.derived_d_norm);
}

void on_epoch(const lrfwfm_epoch_log* log, void* user) {
  const auto* metric = static_cast<const std::string*>(user);
  if (log->has_valid) {
    std::printf("epoch=%zu train_loss=%.4f valid_%s=%.4f\n", log->epoch, log->train_loss,
                metric->c_str(), log->valid_metric);
  } else {
    std::printf("epoch=%zu train_loss=%.4f\n", log->epoch, log->train_loss);
  }
  std::fflush(stdout);
}

void write_spectrum(const Model& reference, const Model& approx, const std::string& data,
                    const std::string& path) {
  lrfwfm_spectrum_report rep{};
  check(lrfwfm_spectrum_write(reference.get(), approx.get(),
                              data.empty() ? nullptr : data.c_str(), path.c_str(), &rep));
  std::printf("spectrum=%s sigma_max=%.4f bound=%.4f exact=%.4f\n", path.c_str(),
              rep.sigma_max, rep.bound, rep.exact);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Field-weighted factorization machines with low-rank interactions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lrfwfm_version()));

  // ingest
  std::string ml_dir, ingest_data, ingest_schema;
  auto* ingest = app.add_subcommand("ingest", "Convert MovieLens-1M files to a dataset");
  ingest->add_option("--movielens", ml_dir, "Directory with ratings.dat, users.dat, movies.dat")
      ->required();
  ingest->add_option("--data-out", ingest_data, "Output dataset (TSV)")->required();
  ingest->add_option("--schema-out", ingest_schema, "Output schema")->required();

  // train
  lrfwfm_train_config tc;
  lrfwfm_train_config_default(&tc);
  std::string t_data, t_schema, t_out, t_vocab, t_variant = "fm", t_loss = "logloss",
                                                t_opt = "adam";
  std::size_t t_rank = tc.rank;
  std::uint64_t t_keep = 0;
  bool t_keep_best = false;
  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--data", t_data, "Dataset file")->required()->check(CLI::ExistingFile);
  train->add_option("--schema", t_schema, "Schema file")->required()->check(CLI::ExistingFile);
  train->add_option("--model-out", t_out, "Output model file")->required();
  train->add_option("--vocab-out", t_vocab, "Output vocabulary (default <model-out>.vocab)");
  train->add_option("--variant", t_variant, "fm|fwfm|pruned|dplr")
      ->check(CLI::IsMember({"fm", "fwfm", "pruned", "dplr"}));
  train->add_option("--rank", t_rank, "DPLR rank or pruned rank-equivalent");
  train->add_option("--keep", t_keep, "Pruned keep count (overrides --rank)");
  train->add_option("--dim", tc.dim, "Embedding dimension k");
  train->add_option("--lr", tc.learning_rate, "Learning rate");
  train->add_option("--epochs", tc.epochs, "Training epochs");
  train->add_option("--batch", tc.batch_size, "Mini-batch size");
  train->add_option("--seed", tc.seed, "Seed for split, init and shuffling");
  train->add_option("--loss", t_loss, "logloss|mse")->check(CLI::IsMember({"logloss", "mse"}));
  train->add_option("--optimizer", t_opt, "adam|sgd")->check(CLI::IsMember({"adam", "sgd"}));
  train->add_option("--weight-decay", tc.weight_decay, "L2 weight decay");
  train->add_option("--finetune-epochs", tc.finetune_epochs, "Pruned fine-tune epochs");
  train->add_flag("--keep-best", t_keep_best, "Keep the epoch with the best validation metric");

  // eval
  std::string e_data, e_model, e_vocab, e_loss = "logloss", e_split = "all";
  std::uint64_t e_seed = 0;
  auto* eval = app.add_subcommand("eval", "Evaluate a model");
  eval->add_option("--data", e_data, "Dataset file")->required()->check(CLI::ExistingFile);
  eval->add_option("--model", e_model, "Model file")->required()->check(CLI::ExistingFile);
  eval->add_option("--vocab", e_vocab, "Vocabulary (default <model>.vocab)");
  eval->add_option("--loss", e_loss, "logloss|mse")->check(CLI::IsMember({"logloss", "mse"}));
  eval->add_option("--split", e_split, "all|train|validation|test")
      ->check(CLI::IsMember({"all", "train", "validation", "test"}));
  eval->add_option("--seed", e_seed, "Split seed used at training time");

  // prune
  std::string p_model, p_out, p_spectrum, p_data;
  std::uint64_t p_keep = 0;
  std::size_t p_rank = 0;
  auto* prune = app.add_subcommand("prune", "Keep the largest-magnitude interactions");
  prune->add_option("--model", p_model, "Dense FwFM model")->required()->check(CLI::ExistingFile);
  auto* keep_opt = prune->add_option("--keep", p_keep, "Number of entries to keep");
  auto* req_opt = prune->add_option("--rank-equivalent", p_rank, "Keep rank*(m+1) entries");
  keep_opt->excludes(req_opt);
  prune->add_option("--out", p_out, "Output model")->required();
  prune->add_option("--spectrum-out", p_spectrum, "Error spectrum report");
  prune->add_option("--data", p_data, "Rows for the spectrum Gram matrix")
      ->check(CLI::ExistingFile);

  // decompose
  std::string d_model, d_out, d_spectrum, d_data;
  std::size_t d_rank = 1, d_iters = 1000;
  double d_tol = 1e-12;
  auto* decompose = app.add_subcommand("decompose", "Post-hoc DPLR fit of a dense model");
  decompose->add_option("--model", d_model, "Dense FwFM model")
      ->required()
      ->check(CLI::ExistingFile);
  decompose->add_option("--rank", d_rank, "DPLR rank");
  decompose->add_option("--iters", d_iters, "Maximum iterations");
  decompose->add_option("--tol", d_tol, "Stop when the objective improves by less");
  decompose->add_option("--out", d_out, "Output model")->required();
  decompose->add_option("--spectrum-out", d_spectrum, "Error spectrum report");
  decompose->add_option("--data", d_data, "Rows for the spectrum Gram matrix")
      ->check(CLI::ExistingFile);

  // bench
  lrfwfm_bench_grid bg;
  lrfwfm_bench_grid_default(&bg);
  std::vector<std::size_t> b_contexts(bg.context_counts, bg.context_counts + bg.n_context_counts);
  std::vector<std::size_t> b_ranks(bg.ranks, bg.ranks + bg.n_ranks);
  std::vector<std::size_t> b_sizes(bg.auction_sizes, bg.auction_sizes + bg.n_auction_sizes);
  std::string b_out, b_summary;
  bool b_baselines = false;
  auto* bench = app.add_subcommand("bench", "Synthetic auction latency grid");
  bench->add_option("--fields", bg.m, "Total fields m");
  bench->add_option("--context-counts", b_contexts, "Context field counts")->delimiter(',');
  bench->add_option("--ranks", b_ranks, "DPLR ranks")->delimiter(',');
  bench->add_option("--auction-sizes", b_sizes, "Items per auction")->delimiter(',');
  bench->add_option("--reps", bg.repetitions, "Repetitions per configuration");
  bench->add_option("--auctions", bg.auctions_per_measurement, "Auctions per measurement");
  bench->add_option("--dim", bg.k, "Embedding dimension k");
  bench->add_option("--seed", bg.seed, "Seed");
  bench->add_option("--out", b_out, "Records CSV")->required();
  bench->add_option("--summary-out", b_summary, "Summary CSV (default <out>.summary.csv)");
  bench->add_flag("--baselines", b_baselines, "Also time FM and dense FwFM");

  // inspect
  std::string i_model;
  auto* inspect = app.add_subcommand("inspect", "Describe a model file");
  inspect->add_option("--model", i_model, "Model file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*ingest) {
      print_config("ingest", {{"movielens", ml_dir}, {"data_out", ingest_data},
                              {"schema_out", ingest_schema}});
      std::size_t rows = 0;
      check(lrfwfm_ingest_movielens(ml_dir.c_str(), ingest_data.c_str(), ingest_schema.c_str(),
                                    &rows));
      std::printf("rows=%zu\n", rows);
    } else if (*train) {
      tc.data_path = t_data.c_str();
      tc.schema_path = t_schema.c_str();
      tc.variant = parse_variant(t_variant);
      tc.rank = t_rank;
      tc.keep = t_keep;
      tc.loss = parse_loss(t_loss);
      tc.optimizer = t_opt == "sgd" ? LRFWFM_OPT_SGD : LRFWFM_OPT_ADAM;
      tc.keep_best = t_keep_best;
      if (t_vocab.empty()) t_vocab = t_out + ".vocab";
      print_config("train", {{"data", t_data},
                             {"schema", t_schema},
                             {"model_out", t_out},
                             {"vocab_out", t_vocab},
                             {"variant", t_variant},
                             {"rank", std::to_string(t_rank)},
                             {"keep", std::to_string(t_keep)},
                             {"dim", std::to_string(tc.dim)},
                             {"lr", fixed4(tc.learning_rate)},
                             {"epochs", std::to_string(tc.epochs)},
                             {"batch", std::to_string(tc.batch_size)},
                             {"seed", std::to_string(tc.seed)},
                             {"loss", t_loss},
                             {"optimizer", t_opt},
                             {"weight_decay", fixed4(tc.weight_decay)},
                             {"finetune_epochs", std::to_string(tc.finetune_epochs)},
                             {"keep_best", t_keep_best ? "1" : "0"}});
      tc.on_epoch = on_epoch;
      tc.user_data = &t_loss;
      Model model;
      lrfwfm_train_report rep{};
      check(lrfwfm_train(&tc, model.out(), &rep));
      check(lrfwfm_model_save(model.get(), t_out.c_str()));
      check(lrfwfm_model_save_vocab(model.get(), t_vocab.c_str()));
      std::printf("rows train=%zu validation=%zu test=%zu\n", rep.train_rows,
                  rep.validation_rows, rep.test_rows);
      if (rep.keep > 0) std::printf("keep=%llu\n", static_cast<unsigned long long>(rep.keep));
      if (rep.validation.count > 0) print_metrics("validation", rep.validation, false);
      if (rep.test.count > 0) print_metrics("test", rep.test, false);
      lrfwfm_model_info info{};
      check(lrfwfm_model_info_get(model.get(), &info));
      std::printf("model=%s kind=%s parameters=%llu\n", t_out.c_str(), kind_name(info.kind),
                  static_cast<unsigned long long>(info.parameter_count));
    } else if (*eval) {
      print_config("eval", {{"data", e_data},
                            {"model", e_model},
                            {"vocab", e_vocab.empty() ? e_model + ".vocab" : e_vocab},
                            {"loss", e_loss},
                            {"split", e_split},
                            {"seed", std::to_string(e_seed)}});
      const Model model = load(e_model, e_vocab);
      lrfwfm_eval_report rep{};
      check(lrfwfm_evaluate(model.get(), e_data.c_str(), parse_split(e_split), e_seed,
                            parse_loss(e_loss), &rep));
      print_metrics("eval", rep, true);
    } else if (*prune) {
      if (keep_opt->count() == 0 && req_opt->count() == 0) {
        fail(kExitUsage, "prune needs --keep or --rank-equivalent");
      }
      print_config("prune", {{"model", p_model},
                             {"keep", keep_opt->count() ? std::to_string(p_keep) : "-"},
                             {"rank_equivalent", req_opt->count() ? std::to_string(p_rank) : "-"},
                             {"out", p_out},
                             {"spectrum_out", p_spectrum.empty() ? "-" : p_spectrum},
                             {"data", p_data.empty() ? "-" : p_data}});
      const Model dense = load(p_model);
      lrfwfm_model_info info{};
      check(lrfwfm_model_info_get(dense.get(), &info));
      const std::uint64_t keep =
          keep_opt->count() ? p_keep : lrfwfm_rank_equivalent_keep(p_rank, info.m);
      Model pruned;
      check(lrfwfm_prune(dense.get(), keep, pruned.out()));
      check(lrfwfm_model_save(pruned.get(), p_out.c_str()));
      if (lrfwfm_model_info_get(pruned.get(), &info) == LRFWFM_OK && info.has_vocab) {
        check(lrfwfm_model_save_vocab(pruned.get(), (p_out + ".vocab").c_str()));
      }
      std::printf("keep=%llu sparsity=%.4f\n", static_cast<unsigned long long>(keep),
                  lrfwfm_sparsity_percent(keep, info.m));
      if (!p_spectrum.empty()) write_spectrum(dense, pruned, p_data, p_spectrum);
    } else if (*decompose) {
      print_config("decompose", {{"model", d_model},
                                 {"rank", std::to_string(d_rank)},
                                 {"iters", std::to_string(d_iters)},
                                 {"tol", std::to_string(d_tol)},
                                 {"out", d_out},
                                 {"spectrum_out", d_spectrum.empty() ? "-" : d_spectrum},
                                 {"data", d_data.empty() ? "-" : d_data}});
      const Model dense = load(d_model);
      Model dplr;
      lrfwfm_decompose_report rep{};
      check(lrfwfm_decompose(dense.get(), d_rank, d_iters, d_tol, dplr.out(), &rep));
      check(lrfwfm_model_save(dplr.get(), d_out.c_str()));
      lrfwfm_model_info info{};
      check(lrfwfm_model_info_get(dplr.get(), &info));
      if (info.has_vocab) check(lrfwfm_model_save_vocab(dplr.get(), (d_out + ".vocab").c_str()));
      std::printf("iterations=%zu frobenius_error=%.4e conversion_error=%.4e\n",
                  rep.iterations, rep.frobenius_error, rep.conversion_error);
      if (!d_spectrum.empty()) write_spectrum(dense, dplr, d_data, d_spectrum);
    } else if (*bench) {
      if (b_summary.empty()) b_summary = b_out + ".summary.csv";
      bg.context_counts = b_contexts.data();
      bg.n_context_counts = b_contexts.size();
      bg.ranks = b_ranks.data();
      bg.n_ranks = b_ranks.size();
      bg.auction_sizes = b_sizes.data();
      bg.n_auction_sizes = b_sizes.size();
      bg.baselines = b_baselines;
      print_config("bench", {{"fields", std::to_string(bg.m)},
                             {"context_counts", join(b_contexts)},
                             {"ranks", join(b_ranks)},
                             {"auction_sizes", join(b_sizes)},
                             {"reps", std::to_string(bg.repetitions)},
                             {"auctions", std::to_string(bg.auctions_per_measurement)},
                             {"dim", std::to_string(bg.k)},
                             {"seed", std::to_string(bg.seed)},
                             {"out", b_out},
                             {"summary_out", b_summary},
                             {"baselines", b_baselines ? "1" : "0"}});
      lrfwfm_bench_report rep{};
      check(lrfwfm_bench_run(&bg, b_out.c_str(), b_summary.c_str(), &rep));
      std::printf("records=%zu summary_rows=%zu\n", rep.records, rep.summary_rows);
      if (rep.low_resolution > 0) {
        std::fprintf(stderr, "warning: %zu measurements below 1us timer resolution\n",
                     rep.low_resolution);
      }
    } else if (*inspect) {
      print_config("inspect", {{"model", i_model}});
      const Model model = load(i_model);
      lrfwfm_model_info info{};
      check(lrfwfm_model_info_get(model.get(), &info));
      print_info(info);
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return kExitOk;
}
