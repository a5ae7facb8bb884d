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

// Post-training transformations of the field-interaction matrix: magnitude
// pruning, post-hoc DPLR fitting and the error spectrum report.

#include <cstdint>
#include <string>
#include <vector>

#include "core/linalg.hpp"
#include "core/model.hpp"

namespace lrfwfm {

/// Pruning budget given either as a keep count or as a rank equivalent.
struct PruneBudget {
  static PruneBudget keep(std::uint64_t q) { return {q, 0, false}; }
  static PruneBudget rank_equivalent(std::size_t rank) { return {0, rank, true}; }

  std::uint64_t keep_count(std::size_t m) const;

  std::uint64_t q = 0;
  std::size_t rank = 0;
  bool by_rank = false;
};

/// ρ(m+1): the number of parameters of a rank-ρ DPLR matrix.
constexpr std::uint64_t rank_equivalent_keep(std::size_t rank, std::size_t m) {
  return static_cast<std::uint64_t>(rank) * (m + 1);
}

/// Percentage of the m(m-1)/2 upper-triangular entries kept, i.e. 100·2q/(m(m-1)).
double sparsity_percent(std::uint64_t q, std::size_t m);

/// Keeps the q largest-magnitude upper entries; ties go to the smaller (i, j).
PrunedSparse prune(const DenseSym& dense, std::uint64_t q);
PrunedSparse prune(const DenseSym& dense, const PruneBudget& budget);

/// Same embeddings and biases with a pruned interaction.
ModelParams prune_model(const ModelParams& dense_model, std::uint64_t q);

struct PosthocResult {
  Dplr dplr;                       // model form, d derived from U and e
  std::vector<double> objective;   // ‖R − approx‖_F after each iteration
  double error = 0.0;              // final objective with the free d
  double conversion_error = 0.0;   // ‖R − materialize_r(dplr)‖_F
  std::size_t iterations = 0;
};

/// Alternating Frobenius fit: eigen-truncation of R − diag(d) to the ρ
/// largest-magnitude eigenpairs, then d = −diag(Uᵀdiag(e)U). Stops when the
/// objective improves by less than `tol` or after `max_iters` iterations.
PosthocResult posthoc_dplr(const linalg::Mat& r, std::size_t rank,
                           std::size_t max_iters = 1000, double tol = 1e-12);

/// Replaces the interaction of `model` by the fitted DPLR matrix.
ModelParams with_interaction(const ModelParams& model, InteractionSpec spec);

struct SpectrumReport {
  std::vector<double> sigma_error;  // σᵢ(E), descending
  std::vector<double> lambda_vvt;   // λᵢ(VVᵀ), descending
  double bound = 0.0;               // Σ λᵢ(VVᵀ)σᵢ(E)
  double exact = 0.0;               // Tr(VᵀEV), signed
};

/// E = materialize_r(approx) − R against field vectors V (m×k).
SpectrumReport error_spectrum(const linalg::Mat& r, const InteractionSpec& approx,
                              const linalg::Mat& v);

/// Same with a PSD Gram matrix G = VVᵀ (m×m) in place of V.
SpectrumReport error_spectrum_gram(const linalg::Mat& r,
                                   const InteractionSpec& approx,
                                   const linalg::Mat& gram);

/// E[vᵢvⱼᵀ] trace under one uniformly drawn feature per field.
linalg::Mat expected_field_gram(const ModelParams& model);

/// Header `index,sigma_error,lambda_vvt,cumulative_bound`, one row per index.
std::string format_spectrum(const SpectrumReport& report);

}  // namespace lrfwfm
