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

#include <algorithm>
#include <cmath>
#include <random>

#include "common/testutil.hpp"
#include "core/decompose.hpp"
#include "core/error.hpp"
#include "doctest.h"

using namespace lrfwfm;
using linalg::Mat;

namespace {

Mat r_fm(std::size_t m) { return materialize_r(FmImplicit{}, m); }

}  // namespace

TEST_CASE("prune keeps the largest magnitudes") {
  std::mt19937_64 rng(41);
  const Mat r = testutil::random_symmetric_zero_diag(rng, 7);
  const auto p = prune(DenseSym{r}, 5);
  REQUIRE(p.entries.size() == 5);
  double smallest_kept = 1e300;
  for (const auto& e : p.entries) {
    CHECK(e.i < e.j);
    CHECK(e.value == r(e.i, e.j));
    smallest_kept = std::min(smallest_kept, std::abs(e.value));
  }
  const auto dropped = materialize_r(p, 7);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = i + 1; j < 7; ++j)
      if (dropped(i, j) == 0.0) CHECK(std::abs(r(i, j)) <= smallest_kept);
  for (std::size_t q = 1; q < p.entries.size(); ++q) {
    const auto& a = p.entries[q - 1];
    const auto& b = p.entries[q];
    CHECK((a.i < b.i || (a.i == b.i && a.j < b.j)));
  }

  CHECK(prune(DenseSym{r}, 0).entries.empty());
  {
    const Mat full = materialize_r(prune(DenseSym{r}, 21), 7);
    CHECK(std::equal(full.data().begin(), full.data().end(), r.data().begin()));
  }
  CHECK_THROWS_AS(prune(DenseSym{r}, 22), Error);

  // Ties go to the lexicographically smaller pair.
  const auto tie = prune(DenseSym{r_fm(4)}, 2);
  REQUIRE(tie.entries.size() == 2);
  CHECK(tie.entries[0].i == 0);
  CHECK(tie.entries[0].j == 1);
  CHECK(tie.entries[1].i == 0);
  CHECK(tie.entries[1].j == 2);
}

TEST_CASE("sparsity accounting") {
  CHECK(rank_equivalent_keep(3, 39) == 120);
  CHECK(sparsity_percent(120, 39) == doctest::Approx(100.0 * 240 / 1482));
  CHECK(std::round(sparsity_percent(120, 39) * 10) / 10 == 16.2);
  CHECK(rank_equivalent_keep(1, 33) == 34);
  CHECK(std::round(sparsity_percent(34, 33) * 10) / 10 == 6.4);
  CHECK(PruneBudget::rank_equivalent(5).keep_count(39) == 200);
  CHECK(PruneBudget::keep(17).keep_count(39) == 17);
}

TEST_CASE("posthoc_dplr") {
  SUBCASE("exact on the FM matrix") {
    for (std::size_t m = 3; m <= 20; ++m) {
      const auto fit = posthoc_dplr(r_fm(m), 1, 1000, 1e-15);
      CHECK(fit.error <= 1e-8);
      CHECK(fit.conversion_error <= 1e-8);
      CHECK(fit.dplr.e[0] == doctest::Approx(static_cast<double>(m)).epsilon(1e-6));
    }
  }
  SUBCASE("full rank") {
    std::mt19937_64 rng(42);
    const Mat r = testutil::random_symmetric_zero_diag(rng, 6);
    const auto fit = posthoc_dplr(r, 6, 100, 1e-12);
    CHECK(fit.error <= 1e-10);
  }
  SUBCASE("objective is non-increasing") {
    std::mt19937_64 rng(43);
    for (int t = 0; t < 200; ++t) {
      const std::size_t m = testutil::pick(rng, 2, 20);
      const std::size_t rank = testutil::pick(rng, 1, std::min<std::size_t>(5, m));
      const Mat r = testutil::random_symmetric_zero_diag(rng, m);
      const auto fit = posthoc_dplr(r, rank, 50, 0.0);
      for (std::size_t i = 1; i < fit.objective.size(); ++i)
        REQUIRE(fit.objective[i] <= fit.objective[i - 1] + 1e-12 * (1.0 + fit.objective[i - 1]));
      CHECK(fit.error <= fit.objective.front() + 1e-12);
      const auto mat = materialize_r(fit.dplr, m);
      CHECK(linalg::is_symmetric(mat, 0.0));
      for (std::size_t i = 0; i < m; ++i) CHECK(mat(i, i) == 0.0);
    }
  }
  SUBCASE("argument checks") {
    CHECK_THROWS_AS(posthoc_dplr(r_fm(4), 0), Error);
    CHECK_THROWS_AS(posthoc_dplr(r_fm(4), 5), Error);
  }
}

TEST_CASE("error_spectrum") {
  std::mt19937_64 rng(44);
  const Mat r = testutil::random_symmetric_zero_diag(rng, 6);
  Mat v(6, 3);
  for (auto& x : v.data()) x = testutil::normal(rng);

  const auto exact = error_spectrum(r, DenseSym{r}, v);
  for (double s : exact.sigma_error) CHECK(s == 0.0);
  CHECK(exact.bound == 0.0);

  const auto pruned = prune(DenseSym{r}, 4);
  const auto rep = error_spectrum(r, pruned, v);
  const Mat e = linalg::subtract(materialize_r(pruned, 6), r);
  auto lam = linalg::sym_eig(e).values;
  for (std::size_t i = 0; i < 6; ++i) CHECK(rep.sigma_error[i] == doctest::Approx(std::abs(lam[i])));
  for (std::size_t i = 1; i < 6; ++i) CHECK(rep.lambda_vvt[i - 1] >= rep.lambda_vvt[i]);
  double tr = 0.0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      double ip = 0.0;
      for (std::size_t c = 0; c < 3; ++c) ip += v(i, c) * v(j, c);
      tr += ip * e(i, j);
    }
  CHECK(rep.exact == doctest::Approx(tr));
  CHECK(rep.exact <= rep.bound);

  for (int t = 0; t < 200; ++t) {
    const std::size_t m = testutil::pick(rng, 2, 12);
    const Mat rr = testutil::random_symmetric_zero_diag(rng, m);
    Mat vv(m, testutil::pick(rng, 1, 8));
    for (auto& x : vv.data()) x = testutil::normal(rng);
    const auto fit = posthoc_dplr(rr, testutil::pick(rng, 1, m), 20, 1e-12);
    const auto sr = error_spectrum(rr, fit.dplr, vv);
    CHECK(sr.exact <= sr.bound + 1e-9 * (1.0 + std::abs(sr.bound)));
  }

  const auto text = format_spectrum(rep);
  CHECK(text.rfind("index,sigma_error,lambda_vvt,cumulative_bound\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 7);
}

TEST_CASE("expected field Gram matrix is PSD") {
  std::mt19937_64 rng(45);
  const auto p = testutil::random_model(rng, 6, 2, 4, ModelKind::kFwFm, 1);
  const auto g = expected_field_gram(p);
  CHECK(linalg::is_symmetric(g));
  for (double x : linalg::sym_eig(g).values) CHECK(x >= -1e-12);
}
