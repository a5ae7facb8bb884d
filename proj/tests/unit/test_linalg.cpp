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

#include <cmath>
#include <random>

#include "common/testutil.hpp"
#include "core/error.hpp"
#include "core/linalg.hpp"
#include "doctest.h"

using lrfwfm::linalg::Mat;
namespace la = lrfwfm::linalg;

namespace {

Mat random_mat(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  Mat m(r, c);
  for (auto& x : m.data()) x = testutil::normal(rng);
  return m;
}

Mat random_sym(std::mt19937_64& rng, std::size_t n) {
  Mat s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) s(i, j) = s(j, i) = testutil::normal(rng);
  return s;
}

}  // namespace

TEST_CASE("matmul") {
  std::mt19937_64 rng(1);
  const Mat m = random_mat(rng, 3, 4);
  CHECK(la::matmul(Mat::identity(3), m) == m);

  const Mat v = random_mat(rng, 5, 2);
  const Mat sums = la::matmul(Mat(1, 5, 1.0), v);
  for (std::size_t c = 0; c < 2; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < 5; ++r) s += v(r, c);
    CHECK(sums(0, c) == doctest::Approx(s).epsilon(1e-14));
  }

  const Mat a = random_mat(rng, 3, 2);
  const Mat b = random_mat(rng, 2, 4);
  const Mat ab = la::matmul(a, b);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < 2; ++t) s += a(i, t) * b(t, j);
      CHECK(ab(i, j) == doctest::Approx(s).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(la::matmul(a, a), lrfwfm::Error);
}

TEST_CASE("frob_inner") {
  std::mt19937_64 rng(2);
  const Mat m = random_mat(rng, 4, 4);
  CHECK(la::frob_inner(m, Mat(4, 4)) == 0.0);
  CHECK(la::frob_inner(Mat::identity(3), Mat::identity(3)) == 3.0);
  const Mat b = random_mat(rng, 4, 4);
  CHECK(testutil::close(la::frob_inner(m, b), la::trace(la::matmul(la::transpose(m), b)), 1e-12));
}

TEST_CASE("trace_form") {
  std::mt19937_64 rng(3);
  CHECK(la::trace_form(random_mat(rng, 4, 3), Mat(4, 4)) == 0.0);
  const Mat q = random_mat(rng, 2, 2);
  CHECK(la::trace_form(Mat::identity(2), q) == doctest::Approx(la::trace(q)).epsilon(1e-14));

  // Trace-form identity over random instances, and circular shift invariance.
  for (int t = 0; t < 1000; ++t) {
    const std::size_t m = testutil::pick(rng, 1, 10);
    const std::size_t k = testutil::pick(rng, 1, 8);
    const Mat a = random_mat(rng, m, k);
    const Mat qq = random_mat(rng, m, m);
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        double ip = 0.0;
        for (std::size_t c = 0; c < k; ++c) ip += a(i, c) * a(j, c);
        s += ip * qq(i, j);
      }
    const double tf = la::trace_form(a, qq);
    REQUIRE(testutil::close(tf, s, 1e-9));
    const double shifted = la::trace(la::matmul(la::matmul(a, la::transpose(a)), qq));
    REQUIRE(testutil::close(shifted, tf, 1e-9));
  }
}

TEST_CASE("sym_eig") {
  SUBCASE("diagonal input is ordered by magnitude") {
    const double d[] = {3.0, 1.0, -2.0};
    const auto eig = la::sym_eig(Mat::diagonal(d));
    REQUIRE(eig.values.size() == 3);
    CHECK(eig.values[0] == 3.0);
    CHECK(eig.values[1] == -2.0);
    CHECK(eig.values[2] == 1.0);
  }
  SUBCASE("all-ones minus identity") {
    Mat r(5, 5, 1.0);
    for (std::size_t i = 0; i < 5; ++i) r(i, i) = 0.0;
    const auto eig = la::sym_eig(r);
    CHECK(eig.values[0] == doctest::Approx(4.0).epsilon(1e-12));
    for (std::size_t i = 1; i < 5; ++i) CHECK(std::abs(eig.values[i] + 1.0) < 1e-12);
  }
  SUBCASE("reconstruction and orthonormality") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 20; ++t) {
      const Mat s = random_sym(rng, 6);
      const auto eig = la::sym_eig(s);
      const Mat lam = Mat::diagonal(eig.values);
      const Mat rec = la::matmul(la::matmul(eig.vectors, lam), la::transpose(eig.vectors));
      CHECK(la::frob_norm(la::subtract(rec, s)) <= 1e-10);
      const Mat gram = la::matmul(la::transpose(eig.vectors), eig.vectors);
      CHECK(la::frob_norm(la::subtract(gram, Mat::identity(6))) <= 1e-10);
      for (std::size_t i = 1; i < 6; ++i)
        CHECK(std::abs(eig.values[i - 1]) >= std::abs(eig.values[i]));
    }
  }
  SUBCASE("rejects non-symmetric input") {
    Mat a(2, 2);
    a(0, 1) = 1.0;
    CHECK_THROWS_AS(la::sym_eig(a), lrfwfm::Error);
    CHECK_THROWS_AS(la::sym_eig(Mat(2, 3)), lrfwfm::Error);
  }
}

TEST_CASE("sym_singular_values") {
  for (double x : la::sym_singular_values(Mat(3, 3))) CHECK(x == 0.0);
  const double d[] = {2.0, -5.0};
  const auto sv = la::sym_singular_values(Mat::diagonal(d));
  CHECK(sv == std::vector<double>{5.0, 2.0});

  std::mt19937_64 rng(5);
  const Mat s = random_sym(rng, 5);
  auto want = la::sym_eig(s).values;
  for (auto& x : want) x = std::abs(x);
  std::sort(want.begin(), want.end(), std::greater<>());
  const auto got = la::sym_singular_values(s);
  for (std::size_t i = 0; i < 5; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-14));
}
