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

#pragma once

// End-to-end runs over dataset files: split, vocabulary, training of any
// variant (pruned via dense training, pruning and a fine-tune pass) and
// evaluation of a saved model on a chosen partition.

#include <cstdint>
#include <string>
#include <vector>

#include "core/model.hpp"
#include "core/schema.hpp"
#include "core/trainer.hpp"

namespace lrfwfm {

ModelKind parse_variant(const std::string& s);
std::string variant_name(ModelKind kind);

enum class Partition { kAll, kTrain, kValidation, kTest };
Partition parse_partition(const std::string& s);

struct TrainRequest {
  std::string data_path;
  std::string schema_path;
  ModelKind variant = ModelKind::kFm;
  std::size_t rank = 2;        // DPLR rank, or pruned rank-equivalent budget
  std::uint64_t keep = 0;      // pruned keep count; overrides rank when > 0
  std::size_t k = 8;
  std::uint64_t split_seed = 0;
  std::size_t finetune_epochs = 1;
  TrainConfig config;
};

struct TrainOutcome {
  ModelParams model;
  FieldSchema vocab;  // schema with vocabularies, for later evaluation
  std::vector<EpochLog> log;
  EvalReport validation;
  EvalReport test;
  std::size_t train_rows = 0;
  std::size_t validation_rows = 0;
  std::size_t test_rows = 0;
  std::uint64_t keep = 0;  // pruned only
};

TrainOutcome run_training(const TrainRequest& request,
                          const EpochCallback& on_epoch = {});

/// Same training on already encoded splits.
TrainOutcome train_encoded(const FieldLayout& layout, std::span<const Sample> train_set,
                           std::span<const Sample> validation,
                           const TrainRequest& request,
                           const EpochCallback& on_epoch = {});

/// Evaluates on rows of `data_path`, optionally restricted to one partition
/// of the seeded split.
EvalReport run_evaluation(const ModelParams& model, const FieldSchema& vocab,
                          const std::string& data_path, Partition partition,
                          std::uint64_t split_seed, LossKind loss);

}  // namespace lrfwfm
