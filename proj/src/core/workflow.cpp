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

#include "core/workflow.hpp"

#include "core/decompose.hpp"
#include "core/error.hpp"

namespace lrfwfm {

ModelKind parse_variant(const std::string& s) {
  if (s == "fm") return ModelKind::kFm;
  if (s == "fwfm") return ModelKind::kFwFm;
  if (s == "pruned") return ModelKind::kPruned;
  if (s == "dplr") return ModelKind::kDplr;
  throw_invalid("unknown variant '" + s + "' (expected fm, fwfm, pruned or dplr)");
}

std::string variant_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kFm: return "fm";
    case ModelKind::kFwFm: return "fwfm";
    case ModelKind::kPruned: return "pruned";
    case ModelKind::kDplr: return "dplr";
  }
  return "?";
}

Partition parse_partition(const std::string& s) {
  if (s == "all") return Partition::kAll;
  if (s == "train") return Partition::kTrain;
  if (s == "validation" || s == "valid") return Partition::kValidation;
  if (s == "test") return Partition::kTest;
  throw_invalid("unknown split '" + s + "' (expected all, train, validation or test)");
}

TrainOutcome train_encoded(const FieldLayout& layout, std::span<const Sample> train_set,
                           std::span<const Sample> validation,
                           const TrainRequest& req, const EpochCallback& on_epoch) {
  TrainOutcome out;
  InitOptions init;
  init.k = req.k;
  init.rank = req.rank;
  init.seed = req.config.seed;
  init.kind = req.variant == ModelKind::kPruned ? ModelKind::kFwFm : req.variant;
  if (req.variant == ModelKind::kDplr && req.rank < 1) {
    throw_invalid("DPLR rank must be at least 1");
  }
  auto result = train(init_model(layout, init), train_set, validation, req.config, on_epoch);
  out.log = std::move(result.log);
  out.model = std::move(result.params);

  if (req.variant == ModelKind::kPruned) {
    out.keep = req.keep > 0 ? req.keep : rank_equivalent_keep(req.rank, layout.m());
    out.model = prune_model(out.model, out.keep);
    if (req.config.epochs > 0 && req.finetune_epochs > 0) {
      TrainConfig tune = req.config;
      tune.epochs = req.finetune_epochs;
      tune.keep_best = false;
      auto tuned = train(std::move(out.model), train_set, validation, tune,
                         [&](const EpochLog& log) {
                           EpochLog shifted = log;
                           shifted.epoch += out.log.size();
                           if (on_epoch) on_epoch(shifted);
                         });
      for (auto log : tuned.log) {
        log.epoch += out.log.size();
        out.log.push_back(log);
      }
      out.model = std::move(tuned.params);
    }
  }
  if (!validation.empty()) out.validation = evaluate(validation, out.model, req.config.loss);
  return out;
}

TrainOutcome run_training(const TrainRequest& req, const EpochCallback& on_epoch) {
  const FieldSchema schema = read_schema_file(req.schema_path);
  const auto rows = read_rows_file(req.data_path, schema);
  if (rows.empty()) throw_data(req.data_path + ": no rows");
  const auto parts = split(rows, req.split_seed);
  if (parts.train.empty()) throw_data(req.data_path + ": training split is empty");
  const FieldSchema vocab = build_vocab(parts.train, schema);
  const auto train_set = encode_rows(parts.train, vocab);
  const auto valid_set = encode_rows(parts.validation, vocab);
  const auto test_set = encode_rows(parts.test, vocab);
  const FieldLayout layout(vocab.context_fields(), vocab.vocab_sizes());

  auto out = train_encoded(layout, train_set, valid_set, req, on_epoch);
  out.vocab = vocab;
  if (!test_set.empty()) out.test = evaluate(test_set, out.model, req.config.loss);
  out.train_rows = train_set.size();
  out.validation_rows = valid_set.size();
  out.test_rows = test_set.size();
  return out;
}

EvalReport run_evaluation(const ModelParams& model, const FieldSchema& vocab,
                          const std::string& data_path, Partition partition,
                          std::uint64_t split_seed, LossKind loss) {
  if (!vocab.has_vocab()) throw_data("vocabulary file has no vocabularies");
  if (vocab.vocab_sizes() != model.layout.vocab_sizes() ||
      vocab.context_fields() != model.layout.context_fields()) {
    throw_data("vocabulary does not match the model's field layout");
  }
  auto rows = read_rows_file(data_path, vocab);
  if (partition != Partition::kAll) {
    auto parts = split(rows, split_seed);
    rows = partition == Partition::kTrain        ? std::move(parts.train)
           : partition == Partition::kValidation ? std::move(parts.validation)
                                                 : std::move(parts.test);
  }
  return evaluate(encode_rows(rows, vocab), model, loss);
}

}  // namespace lrfwfm
