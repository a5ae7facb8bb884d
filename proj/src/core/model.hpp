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

// Model parameters, the four field-interaction variants, and single-sample
// forward passes (a brute-force oracle plus one fast path per variant).
//
// Parameters live in double precision in memory but are kept representable
// as 32-bit floats (the on-disk precision). Kernels are templated on the
// accumulation type: `double` is the wide path, `float` the narrow one.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "core/error.hpp"
#include "core/linalg.hpp"
#include "core/schema.hpp"

namespace lrfwfm {

/// Field count, context/item partition and vocabulary sizes; maps a
/// (field, local id) pair to a global feature row.
class FieldLayout {
 public:
  FieldLayout() = default;
  FieldLayout(std::size_t context_fields, std::vector<std::uint32_t> vocab_sizes);

  std::size_t m() const noexcept { return vocab_sizes_.size(); }
  std::size_t context_fields() const noexcept { return context_fields_; }
  std::size_t item_fields() const noexcept { return m() - context_fields_; }
  std::uint64_t n() const noexcept { return n_; }
  const std::vector<std::uint32_t>& vocab_sizes() const noexcept {
    return vocab_sizes_;
  }
  std::uint64_t offset(std::size_t field) const noexcept { return offsets_[field]; }

  std::uint64_t global_id(std::size_t field, std::uint32_t local) const;

  bool operator==(const FieldLayout&) const = default;

 private:
  std::size_t context_fields_ = 0;
  std::vector<std::uint32_t> vocab_sizes_;
  std::vector<std::uint64_t> offsets_;
  std::uint64_t n_ = 0;
};

// Interaction variants --------------------------------------------------

/// Plain FM: every field pair interacts with weight 1.
struct FmImplicit {
  bool operator==(const FmImplicit&) const = default;
};

/// Full symmetric interaction matrix with zero diagonal.
struct DenseSym {
  linalg::Mat r;
  bool operator==(const DenseSym&) const = default;
};

struct PrunedEntry {
  std::uint32_t i = 0;
  std::uint32_t j = 0;  // i < j
  double value = 0.0;
  bool operator==(const PrunedEntry&) const = default;
};

/// Retained upper-triangular entries, sorted by (i, j).
struct PrunedSparse {
  std::vector<PrunedEntry> entries;
  bool operator==(const PrunedSparse&) const = default;
};

/// R = Uᵀ·diag(e)·U + diag(d) with d = -diag(Uᵀ·diag(e)·U), so diag(R) = 0.
struct Dplr {
  linalg::Mat u;          // rank × m
  std::vector<double> e;  // rank
  std::vector<double> d;  // m, derived

  std::size_t rank() const noexcept { return u.rows(); }
  std::size_t m() const noexcept { return u.cols(); }

  /// (Uᵀ·diag(e)·U)ᵢᵢ; the single routine used for both d and
  /// materialization so the reconstructed diagonal cancels exactly.
  double low_rank_diagonal(std::size_t i) const noexcept {
    double s = 0.0;
    for (std::size_t r = 0; r < u.rows(); ++r) s += e[r] * u(r, i) * u(r, i);
    return s;
  }
  void refresh_diagonal();

  bool operator==(const Dplr&) const = default;
};

using InteractionSpec = std::variant<FmImplicit, DenseSym, PrunedSparse, Dplr>;

/// Kind tags as stored in the model file.
enum class ModelKind : std::uint32_t { kFm = 0, kFwFm = 1, kPruned = 2, kDplr = 3 };

ModelKind kind_of(const InteractionSpec& spec) noexcept;
std::string to_string(ModelKind kind);

struct ModelParams {
  FieldLayout layout;
  std::size_t k = 0;
  double b0 = 0.0;
  std::vector<double> b;  // n
  std::vector<double> w;  // n × k, row-major
  InteractionSpec interaction;

  ModelKind kind() const noexcept { return kind_of(interaction); }
  std::span<const double> embedding(std::uint64_t global) const noexcept {
    return {w.data() + global * k, k};
  }

  /// Number of trainable values: 1 + n + n·k + interaction parameters.
  std::uint64_t parameter_count() const noexcept;
  std::uint64_t interaction_parameter_count() const noexcept;

  bool operator==(const ModelParams&) const = default;
};

/// Checks shapes, finiteness and the per-variant structural invariants.
void validate(const ModelParams& params);

/// Dense symmetric zero-diagonal R for any variant.
linalg::Mat materialize_r(const InteractionSpec& spec, std::size_t m);

/// Rounds every parameter to the nearest 32-bit float.
void round_to_storage(ModelParams& params);

// Initialization --------------------------------------------------------

struct InitOptions {
  ModelKind kind = ModelKind::kFm;
  std::size_t k = 8;
  std::size_t rank = 1;  // DPLR only
  std::uint64_t seed = 0;
};

/// Embeddings N(0, 1/k); b, b0 zero. Dense FwFM starts at the all-ones
/// FM matrix; DPLR starts from a scaled all-ones row with e = 1 plus random
/// rows with alternating-sign e. A pruned model starts with every pair
/// retained at weight 1.
ModelParams init_model(const FieldLayout& layout, const InitOptions& options);

// Field vectors ---------------------------------------------------------

/// Row i is vᵢ = Σ (weight · embedding) over field i's active features.
template <class Real>
struct FieldVectors {
  std::size_t m = 0;
  std::size_t k = 0;
  std::vector<Real> v;  // m × k

  FieldVectors() = default;
  FieldVectors(std::size_t rows, std::size_t cols)
      : m(rows), k(cols), v(rows * cols, Real(0)) {}

  std::span<Real> row(std::size_t i) noexcept { return {v.data() + i * k, k}; }
  std::span<const Real> row(std::size_t i) const noexcept {
    return {v.data() + i * k, k};
  }
  Real squared_norm(std::size_t i) const noexcept {
    Real s = 0;
    for (auto x : row(i)) s += x * x;
    return s;
  }
};

template <class Real>
Real dot(std::span<const Real> a, std::span<const Real> b) noexcept {
  Real s = 0;
  for (std::size_t c = 0; c < a.size(); ++c) s += a[c] * b[c];
  return s;
}

/// Gathers field vectors of `values`, whose first field is `first_field`.
template <class Real>
void gather_into(const FieldValues& values, std::size_t first_field,
                 const ModelParams& params, std::span<Real> out) {
  const std::size_t k = params.k;
  const std::size_t fields = values.field_count();
  for (std::size_t f = 0; f < fields; ++f) {
    Real* dst = out.data() + f * k;
    for (std::size_t c = 0; c < k; ++c) dst[c] = Real(0);
    const std::size_t field = first_field + f;
    for (const auto& feat : values.field(f)) {
      const auto row = params.embedding(params.layout.global_id(field, feat.id));
      const Real wt = static_cast<Real>(feat.weight);
      for (std::size_t c = 0; c < k; ++c) dst[c] += wt * static_cast<Real>(row[c]);
    }
  }
}

template <class Real = double>
FieldVectors<Real> gather_field_vectors(const Sample& sample,
                                        const ModelParams& params) {
  if (sample.values.field_count() != params.layout.m()) {
    throw_data("sample has " + std::to_string(sample.values.field_count()) +
               " fields, model expects " + std::to_string(params.layout.m()));
  }
  FieldVectors<Real> fv(params.layout.m(), params.k);
  gather_into<Real>(sample.values, 0, params, std::span<Real>(fv.v));
  return fv;
}

template <class Real>
Real linear_sum(const FieldValues& values, std::size_t first_field,
                const ModelParams& params) {
  Real s = 0;
  for (std::size_t f = 0; f < values.field_count(); ++f) {
    for (const auto& feat : values.field(f)) {
      s += static_cast<Real>(feat.weight) *
           static_cast<Real>(params.b[params.layout.global_id(first_field + f, feat.id)]);
    }
  }
  return s;
}

// Pairwise terms --------------------------------------------------------

/// Σ_{i<j} ⟨vᵢ, vⱼ⟩ Rᵢⱼ by explicit double loop over a dense R.
template <class Real>
double pairwise_bruteforce(const FieldVectors<Real>& fv, const linalg::Mat& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < fv.m; ++i) {
    for (std::size_t j = i + 1; j < fv.m; ++j) {
      double ip = 0.0;
      auto vi = fv.row(i);
      auto vj = fv.row(j);
      for (std::size_t c = 0; c < fv.k; ++c) {
        ip += static_cast<double>(vi[c]) * static_cast<double>(vj[c]);
      }
      s += ip * r(i, j);
    }
  }
  return s;
}

template <class Real>
double pairwise_bruteforce(const FieldVectors<Real>& fv,
                           const InteractionSpec& spec) {
  return pairwise_bruteforce(fv, materialize_r(spec, fv.m));
}

/// ½(‖Σᵢ vᵢ‖² − Σᵢ ‖vᵢ‖²).
template <class Real>
Real pairwise_fm_fast(const FieldVectors<Real>& fv) {
  std::vector<Real> sum(fv.k, Real(0));
  Real sq = 0;
  for (std::size_t i = 0; i < fv.m; ++i) {
    auto vi = fv.row(i);
    for (std::size_t c = 0; c < fv.k; ++c) {
      sum[c] += vi[c];
      sq += vi[c] * vi[c];
    }
  }
  Real total = 0;
  for (auto x : sum) total += x * x;
  return Real(0.5) * (total - sq);
}

/// ½(Σᵢ dᵢ‖vᵢ‖² + Σᵣ eᵣ‖Pᵣ,:‖²) with P = U·V.
template <class Real>
Real pairwise_dplr_fast(const FieldVectors<Real>& fv, const Dplr& dplr) {
  if (dplr.m() != fv.m) {
    throw_invalid("pairwise_dplr_fast: U has " + std::to_string(dplr.m()) +
                  " columns but there are " + std::to_string(fv.m) + " fields");
  }
  Real diag = 0;
  for (std::size_t i = 0; i < fv.m; ++i) {
    diag += static_cast<Real>(dplr.d[i]) * fv.squared_norm(i);
  }
  std::vector<Real> p(fv.k);
  Real low = 0;
  for (std::size_t r = 0; r < dplr.rank(); ++r) {
    std::fill(p.begin(), p.end(), Real(0));
    for (std::size_t i = 0; i < fv.m; ++i) {
      const Real uri = static_cast<Real>(dplr.u(r, i));
      auto vi = fv.row(i);
      for (std::size_t c = 0; c < fv.k; ++c) p[c] += uri * vi[c];
    }
    Real pn = 0;
    for (auto x : p) pn += x * x;
    low += static_cast<Real>(dplr.e[r]) * pn;
  }
  return Real(0.5) * (diag + low);
}

/// Σ over retained (i, j, r) of ⟨vᵢ, vⱼ⟩·r.
template <class Real>
Real pairwise_pruned(const FieldVectors<Real>& fv, const PrunedSparse& pruned) {
  Real s = 0;
  for (const auto& e : pruned.entries) {
    s += dot<Real>(fv.row(e.i), fv.row(e.j)) * static_cast<Real>(e.value);
  }
  return s;
}

template <class Real>
Real pairwise_dense(const FieldVectors<Real>& fv, const DenseSym& dense) {
  Real s = 0;
  for (std::size_t i = 0; i < fv.m; ++i)
    for (std::size_t j = i + 1; j < fv.m; ++j)
      s += dot<Real>(fv.row(i), fv.row(j)) * static_cast<Real>(dense.r(i, j));
  return s;
}

/// Variant's own fast path.
template <class Real>
Real pairwise(const FieldVectors<Real>& fv, const InteractionSpec& spec) {
  return std::visit(
      [&](const auto& s) -> Real {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FmImplicit>) {
          return pairwise_fm_fast(fv);
        } else if constexpr (std::is_same_v<T, DenseSym>) {
          return pairwise_dense(fv, s);
        } else if constexpr (std::is_same_v<T, PrunedSparse>) {
          return pairwise_pruned(fv, s);
        } else {
          return pairwise_dplr_fast(fv, s);
        }
      },
      spec);
}

/// Raw score b0 + Σ weight·b[id] + pairwise term (no link function).
template <class Real = double>
Real forward(const Sample& sample, const ModelParams& params) {
  const auto fv = gather_field_vectors<Real>(sample, params);
  return static_cast<Real>(params.b0) + linear_sum<Real>(sample.values, 0, params) +
         pairwise(fv, params.interaction);
}

/// Same score with the pairwise term from the brute-force oracle.
double forward_bruteforce(const Sample& sample, const ModelParams& params);

}  // namespace lrfwfm
