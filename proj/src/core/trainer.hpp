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

// Mini-batch training (LogLoss or MSE, Adam or SGD), evaluation metrics and
// flat parameter access for finite-difference checks.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/model.hpp"

namespace lrfwfm {

enum class LossKind { kLogLoss, kMse };
enum class OptimizerKind { kAdam, kSgd };

LossKind parse_loss(const std::string& s);
std::string to_string(LossKind loss);

struct TrainConfig {
  LossKind loss = LossKind::kLogLoss;
  double learning_rate = 1e-3;
  std::size_t epochs = 10;
  std::size_t batch_size = 256;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  double weight_decay = 0.0;
  bool keep_best = false;  // return the epoch with the best validation metric
};

void validate(const TrainConfig& config);

/// Gradients aligned with ModelParams. Only rows listed in `touched` are
/// nonzero in `b` and `w`. `interaction` layout: dense m×m (upper used),
/// pruned one value per entry, DPLR U (rank×m) followed by e.
struct Gradients {
  double b0 = 0.0;
  std::vector<double> b;
  std::vector<double> w;
  std::vector<std::uint64_t> touched;
  std::vector<double> interaction;

  std::vector<bool> seen;  // per row, mirrors `touched`

  void reset(const ModelParams& params);
};

/// Mean loss of the batch; fills `grad`. Throws on non-finite loss.
double loss_and_grad(std::span<const Sample> batch, const ModelParams& params,
                     LossKind loss, Gradients& grad);

/// Mean loss without gradients.
double mean_loss(std::span<const Sample> samples, const ModelParams& params,
                 LossKind loss);

struct EvalReport {
  std::optional<double> logloss;  // classification
  std::optional<double> auc;      // classification, absent if one class only
  std::optional<double> mse;      // regression
  std::size_t count = 0;

  /// Validation metric the trainer tracks: logloss or mse.
  double primary() const { return logloss ? *logloss : mse.value_or(0.0); }
};

/// Mann–Whitney AUC with average ranks on ties; nullopt if a class is absent.
std::optional<double> auc(std::span<const double> scores,
                          std::span<const double> labels);

EvalReport evaluate(std::span<const Sample> samples, const ModelParams& params,
                    LossKind loss);

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> valid_metric;
};

/// `epoch=N train_loss=x valid_<metric>=y` with 6 decimals.
std::string format_epoch(const EpochLog& log, LossKind loss);

using EpochCallback = std::function<void(const EpochLog&)>;

struct TrainResult {
  ModelParams params;
  std::vector<EpochLog> log;
};

/// Deterministic given the config seed; `validation` may be empty.
TrainResult train(ModelParams init, std::span<const Sample> train_set,
                  std::span<const Sample> validation, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Trains once per learning rate and keeps the best validation metric.
struct GridResult {
  TrainResult best;
  double learning_rate = 0.0;
  std::vector<std::pair<double, double>> scores;  // (lr, validation metric)
};
GridResult train_lr_grid(const ModelParams& init, std::span<const Sample> train_set,
                         std::span<const Sample> validation, TrainConfig config,
                         std::span<const double> learning_rates,
                         const EpochCallback& on_epoch = {});

inline constexpr double kDefaultLrGrid[] = {1e-3, 3e-4, 1e-4};

// Flat parameter access -------------------------------------------------

/// Order: b0, b, w, then interaction (dense upper i<j row-major, pruned
/// entries, DPLR U then e).
std::size_t parameter_size(const ModelParams& params);
double get_parameter(const ModelParams& params, std::size_t index);
/// Keeps dense R symmetric and re-derives DPLR d.
void set_parameter(ModelParams& params, std::size_t index, double value);
/// Gradient in the same flat order.
std::vector<double> flatten_gradient(const Gradients& grad,
                                     const ModelParams& params);

}  // namespace lrfwfm
