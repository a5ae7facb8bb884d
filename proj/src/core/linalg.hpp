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

// Small dense linear algebra: the field interaction matrices handled here are
// at most a few hundred rows, so everything is plain row-major double storage.

#include <cstddef>
#include <span>
#include <vector>

namespace lrfwfm::linalg {

class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Mat(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Mat identity(std::size_t n);
  static Mat diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) noexcept {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool operator==(const Mat&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Eigen decomposition of a symmetric matrix. Eigenvalues are ordered by
/// descending magnitude; column i of `vectors` belongs to `values[i]`.
struct SymEig {
  std::vector<double> values;
  Mat vectors;
};

Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);
Mat add(const Mat& a, const Mat& b);
Mat subtract(const Mat& a, const Mat& b);

double trace(const Mat& a);
double frob_inner(const Mat& a, const Mat& b);
double frob_norm(const Mat& a);

/// Tr(AᵀQA) for A m×k and Q m×m, evaluated through explicit products.
double trace_form(const Mat& a, const Mat& q);

/// Cyclic Jacobi eigensolver. Throws on non-symmetric input or when 100
/// sweeps do not bring the off-diagonal norm below 1e-12·‖S‖_F.
SymEig sym_eig(const Mat& s);

/// Singular values of a symmetric matrix, i.e. |λᵢ| in descending order.
std::vector<double> sym_singular_values(const Mat& s);

bool is_symmetric(const Mat& s, double rel_tol = 1e-12);

}  // namespace lrfwfm::linalg
