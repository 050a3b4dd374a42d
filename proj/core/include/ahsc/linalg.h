// Copyright 2026 The AHSC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense row-major matrices and the handful of norm and eigenvalue routines
// the strong-convexity machinery needs. Everything is 64-bit floating point.

#ifndef AHSC_LINALG_H_
#define AHSC_LINALG_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace ahsc {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  // Throws kShape when entries.size() != rows * cols.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static Matrix Identity(std::size_t n);
  static Matrix Diagonal(std::span<const double> diag);
  static Matrix FromRows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {entries_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {entries_.data() + r * cols_, cols_};
  }

  std::span<double> entries() { return entries_; }
  std::span<const double> entries() const { return entries_; }
  double* data() { return entries_.data(); }
  const double* data() const { return entries_.data(); }

  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

// Square matrix whose entries satisfy a(i,j) == a(j,i) bit for bit.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  // Throws kShape if `m` is not square or not exactly symmetric.
  explicit SymmetricMatrix(Matrix m);

  // (m + m^T) / 2, which is exactly symmetric by construction.
  static SymmetricMatrix Symmetrize(const Matrix& m);

  std::size_t dim() const { return m_.rows(); }
  double operator()(std::size_t r, std::size_t c) const { return m_(r, c); }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

Matrix Transpose(const Matrix& a);
// a * b
Matrix MatMul(const Matrix& a, const Matrix& b);
// a^T * b
Matrix MatMulTN(const Matrix& a, const Matrix& b);
// a * b^T
Matrix MatMulNT(const Matrix& a, const Matrix& b);
Matrix Scaled(const Matrix& a, double c);
Matrix Add(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& m);

struct SpectralNormResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Largest singular value by power iteration on M^T M, started from a unit
// vector drawn from `seed`. Stops once the estimate's relative change drops
// below `tol`; on hitting `max_iter` the best estimate is returned with
// converged == false.
SpectralNormResult spectral_norm(const Matrix& m, double tol = 1e-12,
                                 int max_iter = 10000, std::uint64_t seed = 0);

// Jacobi sweeps get expensive quickly; oracle-scale blocks stay below this.
inline constexpr std::size_t kMaxJacobiDim = 512;

struct EigenExtremes {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

// All eigenvalues in ascending order, by cyclic Jacobi rotations. Sweeps stop
// when the off-diagonal Frobenius mass falls below tol * ||S||_F.
// Throws kSize when dim > kMaxJacobiDim.
std::vector<double> sym_eigenvalues(const SymmetricMatrix& s, double tol = 1e-14);

EigenExtremes sym_eig_extremes(const SymmetricMatrix& s, double tol = 1e-14);

// Number of singular values above rel_tol * sigma_max.
std::size_t numerical_rank(const Matrix& m, double rel_tol = 1e-10);

}  // namespace ahsc

#endif  // AHSC_LINALG_H_
