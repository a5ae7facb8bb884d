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

#include "core/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "core/error.hpp"
#include "core/random.hpp"

namespace lrfwfm {

LossKind parse_loss(const std::string& s) {
  if (s == "logloss") return LossKind::kLogLoss;
  if (s == "mse") return LossKind::kMse;
  throw_invalid("unknown loss '" + s + "' (expected logloss or mse)");
}

std::string to_string(LossKind loss) {
  return loss == LossKind::kLogLoss ? "logloss" : "mse";
}

void validate(const TrainConfig& c) {
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) {
    throw_invalid("learning rate must be positive");
  }
  if (c.batch_size < 1) throw_invalid("batch size must be at least 1");
  if (!(c.weight_decay >= 0.0)) throw_invalid("weight decay must be non-negative");
  if (c.optimizer == OptimizerKind::kAdam &&
      !(c.beta1 >= 0.0 && c.beta1 < 1.0 && c.beta2 >= 0.0 && c.beta2 < 1.0 &&
        c.epsilon > 0.0)) {
    throw_invalid("Adam needs 0 <= beta < 1 and epsilon > 0");
  }
}

namespace {

std::size_t interaction_grad_size(const ModelParams& p) {
  const std::size_t m = p.layout.m();
  switch (p.kind()) {
    case ModelKind::kFm: return 0;
    case ModelKind::kFwFm: return m * m;
    case ModelKind::kPruned:
      return std::get<PrunedSparse>(p.interaction).entries.size();
    case ModelKind::kDplr: {
      const auto& d = std::get<Dplr>(p.interaction);
      return d.rank() * m + d.rank();
    }
  }
  return 0;
}

double sample_loss(double score, double label, LossKind loss) {
  if (loss == LossKind::kLogLoss) {
    const double softplus = std::max(score, 0.0) + std::log1p(std::exp(-std::abs(score)));
    return softplus - label * score;
  }
  const double r = score - label;
  return r * r;
}

double loss_derivative(double score, double label, LossKind loss) {
  if (loss == LossKind::kLogLoss) return 1.0 / (1.0 + std::exp(-score)) - label;
  return 2.0 * (score - label);
}

void check_label(double label, LossKind loss, std::size_t index) {
  if (!std::isfinite(label) ||
      (loss == LossKind::kLogLoss && label != 0.0 && label != 1.0)) {
    throw_data("sample " + std::to_string(index) + ": label " + std::to_string(label) +
               " is not valid for " + to_string(loss));
  }
}

}  // namespace

void Gradients::reset(const ModelParams& params) {
  const std::size_t n = params.layout.n();
  if (b.size() != n || w.size() != n * params.k) {
    b.assign(n, 0.0);
    w.assign(n * params.k, 0.0);
    seen.assign(n, false);
    touched.clear();
  } else {
    for (auto row : touched) {
      b[row] = 0.0;
      std::fill_n(w.begin() + row * params.k, params.k, 0.0);
      seen[row] = false;
    }
    touched.clear();
  }
  b0 = 0.0;
  interaction.assign(interaction_grad_size(params), 0.0);
}

namespace {

// Adds scale·∂(loss)/∂θ of one sample into grad; returns the sample loss.
double accumulate(const Sample& s, std::size_t index, const ModelParams& p,
                  LossKind loss, double scale, Gradients& grad) {
  check_label(s.label, loss, index);
  const auto fv = gather_field_vectors<double>(s, p);
  const std::size_t m = fv.m;
  const std::size_t k = fv.k;
  const double score = p.b0 + linear_sum<double>(s.values, 0, p) + pairwise(fv, p.interaction);
  const double l = sample_loss(score, s.label, loss);
  if (!std::isfinite(l)) {
    throw_numeric("non-finite loss at sample " + std::to_string(index));
  }
  const double g = scale * loss_derivative(score, s.label, loss);

  // gv row i = ∂(pairwise)/∂vᵢ = Σⱼ Rᵢⱼ vⱼ.
  std::vector<double> gv(m * k, 0.0);
  std::visit(
      [&](const auto& spec) {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, FmImplicit>) {
          std::vector<double> sum(k, 0.0);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t c = 0; c < k; ++c) sum[c] += fv.v[i * k + c];
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t c = 0; c < k; ++c) gv[i * k + c] = sum[c] - fv.v[i * k + c];
        } else if constexpr (std::is_same_v<T, DenseSym>) {
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i + 1; j < m; ++j) {
              const double r = spec.r(i, j);
              for (std::size_t c = 0; c < k; ++c) {
                gv[i * k + c] += r * fv.v[j * k + c];
                gv[j * k + c] += r * fv.v[i * k + c];
              }
              grad.interaction[i * m + j] += g * dot<double>(fv.row(i), fv.row(j));
            }
          }
        } else if constexpr (std::is_same_v<T, PrunedSparse>) {
          for (std::size_t q = 0; q < spec.entries.size(); ++q) {
            const auto& e = spec.entries[q];
            for (std::size_t c = 0; c < k; ++c) {
              gv[e.i * k + c] += e.value * fv.v[e.j * k + c];
              gv[e.j * k + c] += e.value * fv.v[e.i * k + c];
            }
            grad.interaction[q] += g * dot<double>(fv.row(e.i), fv.row(e.j));
          }
        } else {
          const std::size_t rank = spec.rank();
          std::vector<double> pm(rank * k, 0.0);
          std::vector<double> sq(m);
          for (std::size_t i = 0; i < m; ++i) sq[i] = fv.squared_norm(i);
          for (std::size_t r = 0; r < rank; ++r)
            for (std::size_t i = 0; i < m; ++i)
              for (std::size_t c = 0; c < k; ++c) pm[r * k + c] += spec.u(r, i) * fv.v[i * k + c];
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t c = 0; c < k; ++c) gv[i * k + c] = spec.d[i] * fv.v[i * k + c];
            for (std::size_t r = 0; r < rank; ++r) {
              const double coef = spec.e[r] * spec.u(r, i);
              for (std::size_t c = 0; c < k; ++c) gv[i * k + c] += coef * pm[r * k + c];
            }
          }
          // d depends on U and e through dᵢ = −Σᵣ eᵣUᵣᵢ².
          double* gu = grad.interaction.data();
          double* ge = gu + rank * m;
          for (std::size_t r = 0; r < rank; ++r) {
            const std::span<const double> pr(pm.data() + r * k, k);
            double diag = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
              const double uri = spec.u(r, i);
              diag += uri * uri * sq[i];
              gu[r * m + i] +=
                  g * spec.e[r] * (dot<double>(pr, fv.row(i)) - uri * sq[i]);
            }
            ge[r] += g * 0.5 * (dot<double>(pr, pr) - diag);
          }
        }
      },
      p.interaction);

  grad.b0 += g;
  for (std::size_t f = 0; f < m; ++f) {
    for (const auto& feat : s.values.field(f)) {
      const std::uint64_t row = p.layout.global_id(f, feat.id);
      if (!grad.seen[row]) {
        grad.seen[row] = true;
        grad.touched.push_back(row);
      }
      const double gw = g * feat.weight;
      grad.b[row] += gw;
      double* dst = grad.w.data() + row * k;
      for (std::size_t c = 0; c < k; ++c) dst[c] += gw * gv[f * k + c];
    }
  }
  return l;
}

template <class IndexFn>
double batch_loss_and_grad(std::size_t count, IndexFn&& sample_at,
                           const ModelParams& params, LossKind loss,
                           Gradients& grad) {
  if (count == 0) throw_invalid("empty batch");
  grad.reset(params);
  const double scale = 1.0 / static_cast<double>(count);
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto [sample, index] = sample_at(i);
    total += accumulate(*sample, index, params, loss, scale, grad);
  }
  std::sort(grad.touched.begin(), grad.touched.end());
  return total * scale;
}

}  // namespace

double loss_and_grad(std::span<const Sample> batch, const ModelParams& params,
                     LossKind loss, Gradients& grad) {
  return batch_loss_and_grad(
      batch.size(), [&](std::size_t i) { return std::pair{&batch[i], i}; }, params,
      loss, grad);
}

double mean_loss(std::span<const Sample> samples, const ModelParams& params,
                 LossKind loss) {
  if (samples.empty()) throw_invalid("no samples");
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    check_label(samples[i].label, loss, i);
    total += sample_loss(forward<double>(samples[i], params), samples[i].label, loss);
  }
  return total / static_cast<double>(samples.size());
}

std::optional<double> auc(std::span<const double> scores,
                          std::span<const double> labels) {
  if (scores.size() != labels.size()) throw_invalid("scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] > 0.5) {
        pos += 1.0;
        rank_sum += avg_rank;
      }
    }
    i = j;
  }
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0.0 || neg == 0.0) return std::nullopt;
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

EvalReport evaluate(std::span<const Sample> samples, const ModelParams& params,
                    LossKind loss) {
  if (samples.empty()) throw_data("evaluation set is empty");
  EvalReport rep;
  rep.count = samples.size();
  std::vector<double> scores(samples.size());
  std::vector<double> labels(samples.size());
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    check_label(samples[i].label, loss, i);
    scores[i] = forward<double>(samples[i], params);
    labels[i] = samples[i].label;
    total += sample_loss(scores[i], labels[i], loss);
  }
  const double mean = total / static_cast<double>(samples.size());
  if (!std::isfinite(mean)) throw_numeric("non-finite evaluation loss");
  if (loss == LossKind::kLogLoss) {
    rep.logloss = mean;
    rep.auc = auc(scores, labels);
  } else {
    rep.mse = mean;
  }
  return rep;
}

std::string format_epoch(const EpochLog& log, LossKind loss) {
  char buf[160];
  if (log.valid_metric) {
    std::snprintf(buf, sizeof buf, "epoch=%zu train_loss=%.6f valid_%s=%.6f", log.epoch,
                  log.train_loss, to_string(loss).c_str(), *log.valid_metric);
  } else {
    std::snprintf(buf, sizeof buf, "epoch=%zu train_loss=%.6f", log.epoch, log.train_loss);
  }
  return buf;
}

namespace {

double to_f32(double x) { return static_cast<double>(static_cast<float>(x)); }

class Optimizer {
 public:
  Optimizer(const TrainConfig& c, const ModelParams& p) : c_(c) {
    if (c.optimizer == OptimizerKind::kAdam) {
      m_b_.assign(p.b.size(), 0.0);
      v_b_.assign(p.b.size(), 0.0);
      m_w_.assign(p.w.size(), 0.0);
      v_w_.assign(p.w.size(), 0.0);
      m_i_.assign(interaction_grad_size(p), 0.0);
      v_i_.assign(interaction_grad_size(p), 0.0);
    }
  }

  void step(ModelParams& p, const Gradients& g) {
    ++t_;
    if (c_.optimizer == OptimizerKind::kAdam) {
      c1_ = 1.0 - std::pow(c_.beta1, static_cast<double>(t_));
      c2_ = 1.0 - std::pow(c_.beta2, static_cast<double>(t_));
    }
    update(p.b0, g.b0, m_b0_, v_b0_);
    const std::size_t k = p.k;
    for (auto row : g.touched) {
      update(p.b[row], g.b[row], m_b_, v_b_, row);
      for (std::size_t c = 0; c < k; ++c) {
        const std::size_t idx = row * k + c;
        update(p.w[idx], g.w[idx], m_w_, v_w_, idx);
      }
    }
    std::visit(
        [&](auto& spec) {
          using T = std::decay_t<decltype(spec)>;
          if constexpr (std::is_same_v<T, DenseSym>) {
            const std::size_t m = spec.r.rows();
            for (std::size_t i = 0; i < m; ++i) {
              for (std::size_t j = i + 1; j < m; ++j) {
                update(spec.r(i, j), g.interaction[i * m + j], m_i_, v_i_, i * m + j);
                spec.r(j, i) = spec.r(i, j);
              }
            }
          } else if constexpr (std::is_same_v<T, PrunedSparse>) {
            for (std::size_t q = 0; q < spec.entries.size(); ++q) {
              update(spec.entries[q].value, g.interaction[q], m_i_, v_i_, q);
            }
          } else if constexpr (std::is_same_v<T, Dplr>) {
            const std::size_t ru = spec.u.size();
            for (std::size_t q = 0; q < ru; ++q) {
              update(spec.u.data()[q], g.interaction[q], m_i_, v_i_, q);
            }
            for (std::size_t r = 0; r < spec.e.size(); ++r) {
              update(spec.e[r], g.interaction[ru + r], m_i_, v_i_, ru + r);
            }
            spec.refresh_diagonal();
          }
        },
        p.interaction);
  }

 private:
  void update(double& x, double grad, std::vector<double>& m, std::vector<double>& v,
              std::size_t i) {
    if (c_.optimizer == OptimizerKind::kAdam) {
      update(x, grad, m[i], v[i]);
    } else {
      double dummy_m = 0.0;
      double dummy_v = 0.0;
      update(x, grad, dummy_m, dummy_v);
    }
  }
  void update(double& x, double grad, double& m, double& v) {
    grad += c_.weight_decay * x;
    if (c_.optimizer == OptimizerKind::kAdam) {
      m = c_.beta1 * m + (1.0 - c_.beta1) * grad;
      v = c_.beta2 * v + (1.0 - c_.beta2) * grad * grad;
      x -= c_.learning_rate * (m / c1_) / (std::sqrt(v / c2_) + c_.epsilon);
    } else {
      x -= c_.learning_rate * grad;
    }
    x = to_f32(x);
  }

  TrainConfig c_;
  std::uint64_t t_ = 0;
  double c1_ = 1.0;
  double c2_ = 1.0;
  double m_b0_ = 0.0;
  double v_b0_ = 0.0;
  std::vector<double> m_b_, v_b_, m_w_, v_w_, m_i_, v_i_;
};

bool all_finite(const ModelParams& p) {
  auto finite = [](std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
  };
  if (!std::isfinite(p.b0) || !finite(p.b) || !finite(p.w)) return false;
  return std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DenseSym>) return finite(s.r.data());
        else if constexpr (std::is_same_v<T, PrunedSparse>) {
          return std::all_of(s.entries.begin(), s.entries.end(),
                             [](const auto& e) { return std::isfinite(e.value); });
        } else if constexpr (std::is_same_v<T, Dplr>) {
          return finite(s.u.data()) && finite(s.e) && finite(s.d);
        } else {
          return true;
        }
      },
      p.interaction);
}

}  // namespace

TrainResult train(ModelParams init, std::span<const Sample> train_set,
                  std::span<const Sample> validation, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  validate(config);
  validate(init);
  TrainResult result;
  result.params = std::move(init);
  if (config.epochs == 0) return result;
  if (train_set.empty()) throw_data("training set is empty");

  ModelParams& p = result.params;
  Rng rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  Optimizer opt(config, p);
  Gradients grad;
  std::optional<ModelParams> best;
  double best_metric = 0.0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(order, rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      const double l = batch_loss_and_grad(
          count,
          [&](std::size_t i) {
            const std::size_t idx = order[start + i];
            return std::pair{&train_set[idx], idx};
          },
          p, config.loss, grad);
      total += l * static_cast<double>(count);
      opt.step(p, grad);
    }
    if (!all_finite(p)) {
      throw_numeric("training diverged at epoch " + std::to_string(epoch) +
                    " (non-finite parameters)");
    }
    EpochLog log;
    log.epoch = epoch;
    log.train_loss = total / static_cast<double>(order.size());
    if (!validation.empty()) {
      log.valid_metric = evaluate(validation, p, config.loss).primary();
      if (config.keep_best && (!best || *log.valid_metric < best_metric)) {
        best = p;
        best_metric = *log.valid_metric;
      }
    }
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  if (best) result.params = std::move(*best);
  return result;
}

GridResult train_lr_grid(const ModelParams& init, std::span<const Sample> train_set,
                         std::span<const Sample> validation, TrainConfig config,
                         std::span<const double> learning_rates,
                         const EpochCallback& on_epoch) {
  if (learning_rates.empty()) throw_invalid("empty learning-rate grid");
  if (validation.empty()) throw_data("learning-rate selection needs a validation set");
  GridResult out;
  bool have = false;
  double best = 0.0;
  for (double lr : learning_rates) {
    config.learning_rate = lr;
    auto run = train(init, train_set, validation, config, on_epoch);
    const double metric = evaluate(validation, run.params, config.loss).primary();
    out.scores.emplace_back(lr, metric);
    if (!have || metric < best) {
      have = true;
      best = metric;
      out.best = std::move(run);
      out.learning_rate = lr;
    }
  }
  return out;
}

// Flat parameter access -------------------------------------------------

namespace {

struct Slot {
  enum Where { kB0, kB, kW, kDense, kPruned, kU, kE } where;
  std::size_t a = 0;
  std::size_t b = 0;
};

Slot locate(const ModelParams& p, std::size_t index) {
  if (index == 0) return {Slot::kB0};
  index -= 1;
  if (index < p.b.size()) return {Slot::kB, index};
  index -= p.b.size();
  if (index < p.w.size()) return {Slot::kW, index};
  index -= p.w.size();
  const std::size_t m = p.layout.m();
  if (const auto* dplr = std::get_if<Dplr>(&p.interaction)) {
    if (index < dplr->u.size()) return {Slot::kU, index};
    index -= dplr->u.size();
    if (index < dplr->e.size()) return {Slot::kE, index};
  } else if (const auto* pruned = std::get_if<PrunedSparse>(&p.interaction)) {
    if (index < pruned->entries.size()) return {Slot::kPruned, index};
  } else if (std::holds_alternative<DenseSym>(p.interaction)) {
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t row = m - i - 1;
      if (index < row) return {Slot::kDense, i, i + 1 + index};
      index -= row;
    }
  }
  throw_invalid("parameter index out of range");
}

}  // namespace

std::size_t parameter_size(const ModelParams& p) {
  return static_cast<std::size_t>(p.parameter_count());
}

double get_parameter(const ModelParams& p, std::size_t index) {
  const Slot s = locate(p, index);
  switch (s.where) {
    case Slot::kB0: return p.b0;
    case Slot::kB: return p.b[s.a];
    case Slot::kW: return p.w[s.a];
    case Slot::kDense: return std::get<DenseSym>(p.interaction).r(s.a, s.b);
    case Slot::kPruned: return std::get<PrunedSparse>(p.interaction).entries[s.a].value;
    case Slot::kU: return std::get<Dplr>(p.interaction).u.data()[s.a];
    case Slot::kE: return std::get<Dplr>(p.interaction).e[s.a];
  }
  return 0.0;
}

void set_parameter(ModelParams& p, std::size_t index, double value) {
  const Slot s = locate(p, index);
  switch (s.where) {
    case Slot::kB0: p.b0 = value; break;
    case Slot::kB: p.b[s.a] = value; break;
    case Slot::kW: p.w[s.a] = value; break;
    case Slot::kDense: {
      auto& r = std::get<DenseSym>(p.interaction).r;
      r(s.a, s.b) = value;
      r(s.b, s.a) = value;
      break;
    }
    case Slot::kPruned: std::get<PrunedSparse>(p.interaction).entries[s.a].value = value; break;
    case Slot::kU: {
      auto& d = std::get<Dplr>(p.interaction);
      d.u.data()[s.a] = value;
      d.refresh_diagonal();
      break;
    }
    case Slot::kE: {
      auto& d = std::get<Dplr>(p.interaction);
      d.e[s.a] = value;
      d.refresh_diagonal();
      break;
    }
  }
}

std::vector<double> flatten_gradient(const Gradients& g, const ModelParams& p) {
  std::vector<double> out;
  out.reserve(parameter_size(p));
  out.push_back(g.b0);
  out.insert(out.end(), g.b.begin(), g.b.end());
  out.insert(out.end(), g.w.begin(), g.w.end());
  if (p.kind() == ModelKind::kFwFm) {
    const std::size_t m = p.layout.m();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) out.push_back(g.interaction[i * m + j]);
  } else {
    out.insert(out.end(), g.interaction.begin(), g.interaction.end());
  }
  return out;
}

}  // namespace lrfwfm
