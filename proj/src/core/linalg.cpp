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

#include "core/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "core/error.hpp"

namespace lrfwfm::linalg {

namespace {

void require_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw_invalid(std::string(op) + ": shape mismatch " +
                  std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                  " vs " + std::to_string(b.rows()) + "x" +
                  std::to_string(b.cols()));
  }
}

void require_square(const Mat& a, const char* op) {
  if (a.rows() != a.cols()) {
    throw_invalid(std::string(op) + ": matrix is not square");
  }
}

}  // namespace

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw_invalid("Mat: data length does not match rows*cols");
  }
}

Mat Mat::identity(std::size_t n) {
  Mat out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

Mat Mat::diagonal(std::span<const double> diag) {
  Mat out(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) out(i, i) = diag[i];
  return out;
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) {
    throw_invalid("matmul: inner dimensions differ (" +
                  std::to_string(a.cols()) + " vs " +
                  std::to_string(b.rows()) + ")");
  }
  Mat out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t l = 0; l < a.cols(); ++l) {
      const double a_il = a(i, l);
      if (a_il == 0.0) continue;
      auto b_row = b.row(l);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += a_il * b_row[j];
    }
  }
  return out;
}

Mat transpose(const Mat& a) {
  Mat out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Mat add(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "add");
  Mat out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
  return out;
}

Mat subtract(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "subtract");
  Mat out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bd[i];
  return out;
}

double trace(const Mat& a) {
  require_square(a, "trace");
  double t = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
  return t;
}

double frob_inner(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "frob_inner");
  auto ad = a.data();
  auto bd = b.data();
  double s = 0.0;
  for (std::size_t i = 0; i < ad.size(); ++i) s += ad[i] * bd[i];
  return s;
}

double frob_norm(const Mat& a) { return std::sqrt(frob_inner(a, a)); }

double trace_form(const Mat& a, const Mat& q) {
  require_square(q, "trace_form");
  if (q.rows() != a.rows()) {
    throw_invalid("trace_form: Q is " + std::to_string(q.rows()) +
                  "x" + std::to_string(q.cols()) + " but A has " +
                  std::to_string(a.rows()) + " rows");
  }
  return trace(matmul(transpose(a), matmul(q, a)));
}

bool is_symmetric(const Mat& s, double rel_tol) {
  if (s.rows() != s.cols()) return false;
  const double scale = frob_norm(s);
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = i + 1; j < s.cols(); ++j)
      if (std::abs(s(i, j) - s(j, i)) > rel_tol * scale) return false;
  return true;
}

SymEig sym_eig(const Mat& s) {
  require_square(s, "sym_eig");
  if (!is_symmetric(s)) throw_invalid("sym_eig: input is not symmetric");

  const std::size_t n = s.rows();
  Mat a = s;
  // Symmetrize exactly so both triangles rotate in lockstep.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = avg;
      a(j, i) = avg;
    }
  Mat v = Mat::identity(n);
  const double threshold = 1e-12 * frob_norm(a);

  auto off_norm = [&] {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) off += a(i, j) * a(i, j);
    return std::sqrt(off);
  };

  constexpr int kMaxSweeps = 100;
  bool converged = false;
  for (int sweep = 0; sweep <= kMaxSweeps; ++sweep) {
    if (off_norm() <= threshold) {
      converged = true;
      break;
    }
    if (sweep == kMaxSweeps) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    throw_numeric("sym_eig: Jacobi iteration did not converge in 100 sweeps");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(a(x, x)) > std::abs(a(y, y));
  });

  SymEig out;
  out.values.resize(n);
  out.vectors = Mat(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = a(order[c], order[c]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
  }
  return out;
}

std::vector<double> sym_singular_values(const Mat& s) {
  auto eig = sym_eig(s);
  std::vector<double> sv(eig.values.size());
  std::transform(eig.values.begin(), eig.values.end(), sv.begin(),
                 [](double x) { return std::abs(x); });
  // Already ordered by magnitude; keep the sort for exact-tie stability.
  std::stable_sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

}  // namespace lrfwfm::linalg
