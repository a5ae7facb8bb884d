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

#include "core/model.hpp"

#include <cmath>

#include "core/random.hpp"

namespace lrfwfm {

FieldLayout::FieldLayout(std::size_t context_fields,
                         std::vector<std::uint32_t> vocab_sizes)
    : context_fields_(context_fields), vocab_sizes_(std::move(vocab_sizes)) {
  if (context_fields_ < 1 || context_fields_ >= vocab_sizes_.size()) {
    throw_invalid("layout needs 1 <= context fields < m (m = " +
                  std::to_string(vocab_sizes_.size()) + ", context = " +
                  std::to_string(context_fields_) + ")");
  }
  offsets_.reserve(vocab_sizes_.size());
  for (auto v : vocab_sizes_) {
    if (v < 1) throw_invalid("every field needs a vocabulary of at least 1");
    offsets_.push_back(n_);
    n_ += v;
  }
}

std::uint64_t FieldLayout::global_id(std::size_t field,
                                     std::uint32_t local) const {
  if (field >= vocab_sizes_.size()) {
    throw_data("field index " + std::to_string(field) + " out of range");
  }
  if (local >= vocab_sizes_[field]) {
    throw_data("feature id " + std::to_string(local) + " out of range for field " +
               std::to_string(field) + " (vocabulary size " +
               std::to_string(vocab_sizes_[field]) + ")");
  }
  return offsets_[field] + local;
}

void Dplr::refresh_diagonal() {
  d.assign(m(), 0.0);
  for (std::size_t i = 0; i < m(); ++i) d[i] = -low_rank_diagonal(i);
}

ModelKind kind_of(const InteractionSpec& spec) noexcept {
  return static_cast<ModelKind>(spec.index());
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kFm: return "FM";
    case ModelKind::kFwFm: return "FwFM";
    case ModelKind::kPruned: return "PrunedFwFM";
    case ModelKind::kDplr: return "DPLR";
  }
  return "unknown";
}

std::uint64_t ModelParams::interaction_parameter_count() const noexcept {
  const std::uint64_t m = layout.m();
  return std::visit(
      [&](const auto& s) -> std::uint64_t {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FmImplicit>) {
          return 0;
        } else if constexpr (std::is_same_v<T, DenseSym>) {
          return m * (m - 1) / 2;
        } else if constexpr (std::is_same_v<T, PrunedSparse>) {
          return s.entries.size();
        } else {
          return s.rank() * (m + 1);
        }
      },
      interaction);
}

std::uint64_t ModelParams::parameter_count() const noexcept {
  const std::uint64_t n = layout.n();
  return 1 + n + n * k + interaction_parameter_count();
}

namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw_numeric(std::string("non-finite ") + what);
}

}  // namespace

void validate(const ModelParams& p) {
  const auto n = p.layout.n();
  const auto m = p.layout.m();
  if (p.k < 1) throw_invalid("embedding dimension must be at least 1");
  if (p.b.size() != n || p.w.size() != n * p.k) {
    throw_invalid("parameter arrays do not match n = " + std::to_string(n));
  }
  require_finite(p.b0, "bias");
  for (double x : p.b) require_finite(x, "linear weight");
  for (double x : p.w) require_finite(x, "embedding value");
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DenseSym>) {
          if (s.r.rows() != m || s.r.cols() != m) throw_invalid("R must be m x m");
          for (std::size_t i = 0; i < m; ++i) {
            if (s.r(i, i) != 0.0) throw_invalid("R must have a zero diagonal");
            for (std::size_t j = i + 1; j < m; ++j) {
              require_finite(s.r(i, j), "interaction weight");
              if (s.r(i, j) != s.r(j, i)) throw_invalid("R must be symmetric");
            }
          }
        } else if constexpr (std::is_same_v<T, PrunedSparse>) {
          for (std::size_t t = 0; t < s.entries.size(); ++t) {
            const auto& e = s.entries[t];
            if (e.i >= e.j || e.j >= m) {
              throw_invalid("pruned entry indices must satisfy i < j < m");
            }
            if (t > 0) {
              const auto& prev = s.entries[t - 1];
              if (std::pair(prev.i, prev.j) >= std::pair(e.i, e.j)) {
                throw_invalid("pruned entries must be sorted and unique");
              }
            }
            require_finite(e.value, "pruned interaction weight");
          }
        } else if constexpr (std::is_same_v<T, Dplr>) {
          if (s.rank() < 1) throw_invalid("DPLR rank must be at least 1");
          if (s.m() != m || s.e.size() != s.rank() || s.d.size() != m) {
            throw_invalid("DPLR factor shapes do not match the layout");
          }
          for (double x : s.u.data()) require_finite(x, "DPLR U entry");
          for (double x : s.e) require_finite(x, "DPLR e entry");
        }
      },
      p.interaction);
}

linalg::Mat materialize_r(const InteractionSpec& spec, std::size_t m) {
  linalg::Mat r(m, m);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FmImplicit>) {
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) r(i, j) = i == j ? 0.0 : 1.0;
        } else if constexpr (std::is_same_v<T, DenseSym>) {
          if (s.r.rows() != m) throw_invalid("materialize_r: size mismatch");
          r = s.r;
        } else if constexpr (std::is_same_v<T, PrunedSparse>) {
          for (const auto& e : s.entries) {
            if (e.j >= m) throw_invalid("materialize_r: entry out of range");
            r(e.i, e.j) = e.value;
            r(e.j, e.i) = e.value;
          }
        } else {
          if (s.m() != m) throw_invalid("materialize_r: size mismatch");
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i + 1; j < m; ++j) {
              double x = 0.0;
              for (std::size_t q = 0; q < s.rank(); ++q) {
                x += s.e[q] * s.u(q, i) * s.u(q, j);
              }
              r(i, j) = x;
              r(j, i) = x;
            }
            r(i, i) = s.low_rank_diagonal(i) + s.d[i];
          }
        }
      },
      spec);
  return r;
}

namespace {

inline double to_f32(double x) {
  return static_cast<double>(static_cast<float>(x));
}

}  // namespace

void round_to_storage(ModelParams& p) {
  p.b0 = to_f32(p.b0);
  for (auto& x : p.b) x = to_f32(x);
  for (auto& x : p.w) x = to_f32(x);
  std::visit(
      [&](auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DenseSym>) {
          for (auto& x : s.r.data()) x = to_f32(x);
        } else if constexpr (std::is_same_v<T, PrunedSparse>) {
          for (auto& e : s.entries) e.value = to_f32(e.value);
        } else if constexpr (std::is_same_v<T, Dplr>) {
          for (auto& x : s.u.data()) x = to_f32(x);
          for (auto& x : s.e) x = to_f32(x);
          s.refresh_diagonal();
        }
      },
      p.interaction);
}

ModelParams init_model(const FieldLayout& layout, const InitOptions& opt) {
  if (opt.k < 1) throw_invalid("embedding dimension must be at least 1");
  ModelParams p;
  p.layout = layout;
  p.k = opt.k;
  p.b.assign(layout.n(), 0.0);
  p.w.resize(layout.n() * opt.k);
  Rng rng(opt.seed);
  const double w_scale = 1.0 / std::sqrt(static_cast<double>(opt.k));
  for (auto& x : p.w) x = w_scale * standard_normal(rng);

  const std::size_t m = layout.m();
  switch (opt.kind) {
    case ModelKind::kFm:
      p.interaction = FmImplicit{};
      break;
    case ModelKind::kFwFm:
      p.interaction = DenseSym{materialize_r(FmImplicit{}, m)};
      break;
    case ModelKind::kPruned: {
      PrunedSparse ps;
      for (std::uint32_t i = 0; i < m; ++i)
        for (std::uint32_t j = i + 1; j < m; ++j) ps.entries.push_back({i, j, 1.0});
      p.interaction = std::move(ps);
      break;
    }
    case ModelKind::kDplr: {
      if (opt.rank < 1) throw_invalid("DPLR rank must be at least 1");
      Dplr d;
      d.u = linalg::Mat(opt.rank, m);
      d.e.assign(opt.rank, 0.0);
      const double u_scale = 1.0 / std::sqrt(static_cast<double>(m));
      for (std::size_t i = 0; i < m; ++i) d.u(0, i) = u_scale;
      d.e[0] = 1.0;
      for (std::size_t r = 1; r < opt.rank; ++r) {
        for (std::size_t i = 0; i < m; ++i) d.u(r, i) = u_scale * standard_normal(rng);
        d.e[r] = (r % 2 == 1) ? 1.0 : -1.0;
      }
      d.refresh_diagonal();
      p.interaction = std::move(d);
      break;
    }
  }
  round_to_storage(p);
  return p;
}

double forward_bruteforce(const Sample& sample, const ModelParams& params) {
  const auto fv = gather_field_vectors<double>(sample, params);
  return params.b0 + linear_sum<double>(sample.values, 0, params) +
         pairwise_bruteforce(fv, params.interaction);
}

}  // namespace lrfwfm
