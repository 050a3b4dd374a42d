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

#include "ahsc/linalg.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "ahsc/error.h"
#include "ahsc/random.h"

namespace ahsc {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap View(const Matrix& m) {
  return ConstMap(m.data(), static_cast<Eigen::Index>(m.rows()),
                  static_cast<Eigen::Index>(m.cols()));
}

MutMap View(Matrix& m) {
  return MutMap(m.data(), static_cast<Eigen::Index>(m.rows()),
                static_cast<Eigen::Index>(m.cols()));
}

std::string ShapeOf(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

double Norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows * cols) {
    Fail(ErrorKind::kShape, "matrix " + std::to_string(rows) + "x" + std::to_string(cols) +
                                " given " + std::to_string(entries_.size()) + " entries");
  }
}

Matrix Matrix::Identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::Diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::FromRows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> entries;
  entries.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) Fail(ErrorKind::kShape, "ragged matrix literal");
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(entries));
}

bool Matrix::all_finite() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](double x) { return std::isfinite(x); });
}

SymmetricMatrix::SymmetricMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    Fail(ErrorKind::kShape, "symmetric matrix must be square, got " + ShapeOf(m_));
  }
  for (std::size_t i = 0; i < m_.rows(); ++i) {
    for (std::size_t j = i + 1; j < m_.cols(); ++j) {
      if (m_(i, j) != m_(j, i)) {
        Fail(ErrorKind::kShape, "matrix is not symmetric at (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      }
    }
  }
}

SymmetricMatrix SymmetricMatrix::Symmetrize(const Matrix& m) {
  if (m.rows() != m.cols()) {
    Fail(ErrorKind::kShape, "cannot symmetrize " + ShapeOf(m));
  }
  Matrix s(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
  }
  return SymmetricMatrix(std::move(s));
}

Matrix Transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

Matrix MatMul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    Fail(ErrorKind::kShape, "matmul " + ShapeOf(a) + " * " + ShapeOf(b));
  }
  Matrix out(a.rows(), b.cols());
  View(out).noalias() = View(a) * View(b);
  return out;
}

Matrix MatMulTN(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    Fail(ErrorKind::kShape, "matmul " + ShapeOf(a) + "^T * " + ShapeOf(b));
  }
  Matrix out(a.cols(), b.cols());
  View(out).noalias() = View(a).transpose() * View(b);
  return out;
}

Matrix MatMulNT(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    Fail(ErrorKind::kShape, "matmul " + ShapeOf(a) + " * " + ShapeOf(b) + "^T");
  }
  Matrix out(a.rows(), b.rows());
  View(out).noalias() = View(a) * View(b).transpose();
  return out;
}

Matrix Scaled(const Matrix& a, double c) {
  Matrix out = a;
  for (double& x : out.entries()) x *= c;
  return out;
}

Matrix Add(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    Fail(ErrorKind::kShape, "add " + ShapeOf(a) + " + " + ShapeOf(b));
  }
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.entries()[i] += b.entries()[i];
  return out;
}

double frobenius_norm(const Matrix& m) { return Norm2(m.entries()); }

SpectralNormResult spectral_norm(const Matrix& m, double tol, int max_iter,
                                 std::uint64_t seed) {
  if (!(tol > 0.0) || max_iter < 1) {
    Fail(ErrorKind::kNumeric, "spectral_norm needs tol > 0 and max_iter >= 1");
  }
  SpectralNormResult result;
  if (m.empty()) {
    result.converged = true;
    return result;
  }

  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix v(m.cols(), 1);
  for (double& x : v.entries()) x = normal(rng);
  double vn = frobenius_norm(v);
  for (double& x : v.entries()) x /= vn;

  double previous = -1.0;
  for (int it = 1; it <= max_iter; ++it) {
    result.iterations = it;
    const Matrix mv = MatMul(m, v);
    // ||M v|| for unit v is the Rayleigh estimate of sigma_max.
    const double sigma = frobenius_norm(mv);
    result.value = std::max(result.value, sigma);
    Matrix w = MatMulTN(m, mv);
    const double wn = frobenius_norm(w);
    if (wn == 0.0) {
      // v sits in the null space of M^T M; either M is zero or the start was
      // unlucky enough to be exactly orthogonal to the row space.
      if (frobenius_norm(m) == 0.0) {
        result.converged = true;
        return result;
      }
      for (double& x : v.entries()) x = normal(rng);
      vn = frobenius_norm(v);
      for (double& x : v.entries()) x /= vn;
      previous = -1.0;
      continue;
    }
    for (double& x : w.entries()) x /= wn;
    v = std::move(w);
    if (previous >= 0.0 && std::abs(sigma - previous) <= tol * std::max(sigma, 1e-300)) {
      result.converged = true;
      return result;
    }
    previous = sigma;
  }
  return result;
}

std::vector<double> sym_eigenvalues(const SymmetricMatrix& s, double tol) {
  const std::size_t n = s.dim();
  if (n > kMaxJacobiDim) {
    Fail(ErrorKind::kSize, "Jacobi eigensolver limited to dim <= " +
                               std::to_string(kMaxJacobiDim) + ", got " + std::to_string(n));
  }
  Matrix a = s.matrix();
  const double total = frobenius_norm(a);
  auto off_diagonal = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) acc += a(i, j) * a(i, j);
      }
    }
    return std::sqrt(acc);
  };

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && off_diagonal() > tol * total; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
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
      }
    }
  }

  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

EigenExtremes sym_eig_extremes(const SymmetricMatrix& s, double tol) {
  if (s.dim() == 0) Fail(ErrorKind::kShape, "eigenvalues of an empty matrix");
  const std::vector<double> eig = sym_eigenvalues(s, tol);
  return {eig.front(), eig.back()};
}

std::size_t numerical_rank(const Matrix& m, double rel_tol) {
  if (m.empty()) return 0;
  const Matrix gram = m.cols() <= m.rows() ? MatMulTN(m, m) : MatMulNT(m, m);
  const std::vector<double> eig = sym_eigenvalues(SymmetricMatrix::Symmetrize(gram));
  const double top = std::max(eig.back(), 0.0);
  if (top == 0.0) return 0;
  // Gram eigenvalues are squared singular values.
  const double cutoff = rel_tol * std::sqrt(top);
  std::size_t rank = 0;
  for (double e : eig) {
    if (std::sqrt(std::max(e, 0.0)) > cutoff) ++rank;
  }
  return rank;
}

}  // namespace ahsc
