#ifndef REEBCONE_LINALG_HPP
#define REEBCONE_LINALG_HPP

// Small dense linear algebra over Rational or Real. Sizes here are at most
// a few dozen, so everything is plain Gaussian elimination.

#include "reebcone/numeric.hpp"

#include <optional>
#include <utility>

namespace reebcone::linalg {

template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  // Rows of the matrix are the given vectors.
  template <class U>
  static Matrix from_rows(const std::vector<std::vector<U>>& rows, std::size_t cols) {
    Matrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != cols) throw Error(ErrorCode::DimensionMismatch, "from_rows: ragged input");
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = T(rows[i][j]);
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Vec<T> row(std::size_t i) const {
    return Vec<T>(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                  data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <class T>
Vec<T> multiply(const Matrix<T>& a, const Vec<T>& x) {
  Vec<T> y(a.rows(), T(0));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

// Row echelon form in place; returns pivot columns. Real pivots below
// tolerance (relative to the largest entry) are treated as zero.
template <class T>
std::vector<std::size_t> row_reduce(Matrix<T>& m, std::size_t ncols_to_reduce) {
  std::vector<std::size_t> pivots;
  T scale(1);
  if constexpr (!is_exact_v<T>) {
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j)
        if (abs_of(m(i, j)) > scale) scale = abs_of(m(i, j));
  }
  std::size_t r = 0;
  for (std::size_t c = 0; c < ncols_to_reduce && r < m.rows(); ++c) {
    std::size_t best = m.rows();
    for (std::size_t i = r; i < m.rows(); ++i) {
      if (sign_of(m(i, c), scale) == 0) continue;
      if constexpr (is_exact_v<T>) {
        best = i;
        break;
      } else {
        if (best == m.rows() || abs_of(m(i, c)) > abs_of(m(best, c))) best = i;
      }
    }
    if (best == m.rows()) continue;
    if (best != r)
      for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(r, j), m(best, j));
    T inv = T(1) / m(r, c);
    for (std::size_t j = c; j < m.cols(); ++j) m(r, j) *= inv;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == r || m(i, c) == 0) continue;
      T f = m(i, c);
      for (std::size_t j = c; j < m.cols(); ++j) m(i, j) -= f * m(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

template <class T>
std::size_t rank(Matrix<T> m) {
  return row_reduce(m, m.cols()).size();
}

template <class T, class U>
std::size_t rank_of_rows(const std::vector<std::vector<U>>& rows, std::size_t cols) {
  if (rows.empty()) return 0;
  return rank(Matrix<T>::from_rows(rows, cols));
}

template <class T>
T determinant(Matrix<T> m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "determinant of non-square matrix");
  const std::size_t n = m.rows();
  T det(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = n;
    for (std::size_t i = c; i < n; ++i) {
      if (m(i, c) != 0 && (p == n || abs_of(m(i, c)) > abs_of(m(p, c)))) p = i;
      if constexpr (is_exact_v<T>) {
        if (p != n) break;
      }
    }
    if (p == n) return T(0);
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(c, j), m(p, j));
      det = -det;
    }
    det *= m(c, c);
    for (std::size_t i = c + 1; i < n; ++i) {
      if (m(i, c) == 0) continue;
      T f = m(i, c) / m(c, c);
      for (std::size_t j = c; j < n; ++j) m(i, j) -= f * m(c, j);
    }
  }
  return det;
}

// Exact integer determinant (Bareiss).
Integer integer_determinant(const std::vector<IntVec>& rows);

template <class T>
std::optional<Matrix<T>> inverse(const Matrix<T>& a) {
  const std::size_t n = a.rows();
  Matrix<T> aug(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
    aug(i, n + i) = T(1);
  }
  auto piv = row_reduce(aug, n);
  if (piv.size() != n) return std::nullopt;
  Matrix<T> inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
  return inv;
}

enum class SolveStatus { Unique, Inconsistent, Underdetermined };

// Solves A x = b for possibly non-square A.
template <class T>
std::pair<SolveStatus, Vec<T>> solve(const Matrix<T>& a, const Vec<T>& b) {
  Matrix<T> aug(a.rows(), a.cols() + 1);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) aug(i, j) = a(i, j);
    aug(i, a.cols()) = b[i];
  }
  auto piv = row_reduce(aug, a.cols() + 1);
  if (!piv.empty() && piv.back() == a.cols()) return {SolveStatus::Inconsistent, {}};
  if (piv.size() < a.cols()) return {SolveStatus::Underdetermined, {}};
  Vec<T> x(a.cols(), T(0));
  for (std::size_t r = 0; r < piv.size(); ++r) x[piv[r]] = aug(r, a.cols());
  return {SolveStatus::Unique, x};
}

// Cholesky factor L (lower) of a symmetric matrix, or nullopt when not
// positive definite.
template <class T>
std::optional<Matrix<T>> cholesky(const Matrix<T>& a) {
  const std::size_t n = a.rows();
  Matrix<T> l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    T d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0)) return std::nullopt;
    using std::sqrt;
    using boost::multiprecision::sqrt;
    l(j, j) = sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      T s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

template <class T>
Vec<T> cholesky_solve(const Matrix<T>& l, const Vec<T>& b) {
  const std::size_t n = l.rows();
  Vec<T> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    T s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  Vec<T> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    T s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

// Column-style Hermite normal form of the lattice spanned by the columns:
// returns a lower-triangular basis (as columns) with positive diagonal.
std::vector<std::vector<Integer>> lower_hermite_basis(const std::vector<IntVec>& columns);

}  // namespace reebcone::linalg

#endif  // REEBCONE_LINALG_HPP
