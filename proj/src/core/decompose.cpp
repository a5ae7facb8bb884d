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

#include "core/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "core/error.hpp"

namespace lrfwfm {

using linalg::Mat;

std::uint64_t PruneBudget::keep_count(std::size_t m) const {
  return by_rank ? rank_equivalent_keep(rank, m) : q;
}

double sparsity_percent(std::uint64_t q, std::size_t m) {
  if (m < 2) throw_invalid("sparsity needs at least two fields");
  return 100.0 * 2.0 * static_cast<double>(q) /
         (static_cast<double>(m) * static_cast<double>(m - 1));
}

PrunedSparse prune(const DenseSym& dense, std::uint64_t q) {
  const std::size_t m = dense.r.rows();
  const std::uint64_t max_q = m * (m - 1) / 2;
  if (q > max_q) {
    throw_invalid("keep count " + std::to_string(q) + " exceeds the " +
                  std::to_string(max_q) + " field pairs");
  }
  std::vector<PrunedEntry> all;
  all.reserve(max_q);
  for (std::uint32_t i = 0; i < m; ++i)
    for (std::uint32_t j = i + 1; j < m; ++j) all.push_back({i, j, dense.r(i, j)});
  // Stable sort keeps row-major (i, j) order among equal magnitudes.
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return std::abs(a.value) > std::abs(b.value);
  });
  all.resize(q);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  return PrunedSparse{std::move(all)};
}

PrunedSparse prune(const DenseSym& dense, const PruneBudget& budget) {
  return prune(dense, budget.keep_count(dense.r.rows()));
}

ModelParams prune_model(const ModelParams& dense_model, std::uint64_t q) {
  const auto* dense = std::get_if<DenseSym>(&dense_model.interaction);
  if (!dense) {
    throw_invalid("pruning needs a dense FwFM model, got " +
                  to_string(dense_model.kind()));
  }
  return with_interaction(dense_model, prune(*dense, q));
}

ModelParams with_interaction(const ModelParams& model, InteractionSpec spec) {
  ModelParams out;
  out.layout = model.layout;
  out.k = model.k;
  out.b0 = model.b0;
  out.b = model.b;
  out.w = model.w;
  out.interaction = std::move(spec);
  return out;
}

namespace {

// Low-rank part Uᵀdiag(e)U.
Mat low_rank(const Mat& u, const std::vector<double>& e) {
  const std::size_t m = u.cols();
  Mat out(m, m);
  for (std::size_t r = 0; r < u.rows(); ++r)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) out(i, j) += e[r] * u(r, i) * u(r, j);
  return out;
}

}  // namespace

PosthocResult posthoc_dplr(const Mat& r, std::size_t rank, std::size_t max_iters,
                           double tol) {
  const std::size_t m = r.rows();
  if (rank < 1) throw_invalid("post-hoc DPLR rank must be at least 1");
  if (rank > m) {
    throw_invalid("post-hoc DPLR rank " + std::to_string(rank) + " exceeds m = " +
                  std::to_string(m));
  }
  if (max_iters < 1) throw_invalid("post-hoc DPLR needs at least one iteration");
  if (!linalg::is_symmetric(r)) throw_invalid("interaction matrix is not symmetric");

  PosthocResult result;
  std::vector<double> d(m, 0.0);
  Mat u(rank, m);
  std::vector<double> e(rank);
  for (std::size_t it = 0; it < max_iters; ++it) {
    Mat shifted = r;
    for (std::size_t i = 0; i < m; ++i) shifted(i, i) -= d[i];
    const auto eig = linalg::sym_eig(shifted);
    for (std::size_t q = 0; q < rank; ++q) {
      e[q] = eig.values[q];
      for (std::size_t i = 0; i < m; ++i) u(q, i) = eig.vectors(i, q);
    }
    const Mat low = low_rank(u, e);
    for (std::size_t i = 0; i < m; ++i) d[i] = r(i, i) - low(i, i);

    double sq = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const double diff = r(i, j) - low(i, j) - (i == j ? d[i] : 0.0);
        sq += diff * diff;
      }
    }
    const double obj = std::sqrt(sq);
    const bool stalled =
        !result.objective.empty() && result.objective.back() - obj < tol;
    result.objective.push_back(obj);
    result.iterations = it + 1;
    if (stalled || obj <= tol) break;
  }
  result.error = result.objective.back();
  result.dplr.u = u;
  result.dplr.e = e;
  result.dplr.refresh_diagonal();
  result.conversion_error = linalg::frob_norm(
      linalg::subtract(r, materialize_r(result.dplr, m)));
  return result;
}

SpectrumReport error_spectrum_gram(const Mat& r, const InteractionSpec& approx,
                                   const Mat& gram) {
  const std::size_t m = r.rows();
  if (gram.rows() != m || gram.cols() != m) {
    throw_invalid("Gram matrix must be " + std::to_string(m) + "x" + std::to_string(m));
  }
  const Mat err = linalg::subtract(materialize_r(approx, m), r);
  SpectrumReport rep;
  rep.sigma_error = linalg::sym_singular_values(err);
  auto lam = linalg::sym_eig(gram).values;
  std::sort(lam.begin(), lam.end(), std::greater<>());
  rep.lambda_vvt = std::move(lam);
  for (std::size_t i = 0; i < m; ++i) rep.bound += rep.lambda_vvt[i] * rep.sigma_error[i];
  rep.exact = linalg::frob_inner(err, gram);
  return rep;
}

SpectrumReport error_spectrum(const Mat& r, const InteractionSpec& approx,
                              const Mat& v) {
  if (v.rows() != r.rows()) {
    throw_invalid("field vectors have " + std::to_string(v.rows()) +
                  " rows, interaction matrix has " + std::to_string(r.rows()));
  }
  const Mat gram = linalg::matmul(v, linalg::transpose(v));
  auto rep = error_spectrum_gram(r, approx, gram);
  const Mat err = linalg::subtract(materialize_r(approx, r.rows()), r);
  rep.exact = linalg::trace_form(v, err);
  return rep;
}

Mat expected_field_gram(const ModelParams& model) {
  const std::size_t m = model.layout.m();
  const std::size_t k = model.k;
  Mat mean(m, k);
  std::vector<double> second(m, 0.0);
  for (std::size_t f = 0; f < m; ++f) {
    const std::uint32_t size = model.layout.vocab_sizes()[f];
    const std::uint64_t base = model.layout.offset(f);
    for (std::uint32_t id = 0; id < size; ++id) {
      const auto row = model.embedding(base + id);
      for (std::size_t c = 0; c < k; ++c) {
        mean(f, c) += row[c] / size;
        second[f] += row[c] * row[c] / size;
      }
    }
  }
  Mat gram = linalg::matmul(mean, linalg::transpose(mean));
  for (std::size_t f = 0; f < m; ++f) gram(f, f) = second[f];
  return gram;
}

std::string format_spectrum(const SpectrumReport& report) {
  std::string out = "index,sigma_error,lambda_vvt,cumulative_bound\n";
  double cumulative = 0.0;
  char buf[128];
  for (std::size_t i = 0; i < report.sigma_error.size(); ++i) {
    cumulative += report.lambda_vvt[i] * report.sigma_error[i];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i + 1,
                  report.sigma_error[i], report.lambda_vvt[i], cumulative);
    out += buf;
  }
  return out;
}

}  // namespace lrfwfm
