#include "reebcone/linalg.hpp"

namespace reebcone::linalg {

Integer integer_determinant(const std::vector<IntVec>& rows) {
  const std::size_t n = rows.size();
  std::vector<std::vector<Integer>> m(n, std::vector<Integer>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw Error(ErrorCode::DimensionMismatch, "integer_determinant: non-square");
    for (std::size_t j = 0; j < n; ++j) m[i][j] = rows[i][j];
  }
  if (n == 0) return Integer(1);
  Integer prev(1);
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m[k][k] == 0) {
      std::size_t p = k + 1;
      while (p < n && m[p][k] == 0) ++p;
      if (p == n) return Integer(0);
      std::swap(m[k], m[p]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
      }
    }
    prev = m[k][k];
  }
  return sign * m[n - 1][n - 1];
}

namespace {

// g = x*a + y*b with g = gcd(a, b) >= 0.
void extended_gcd(const Integer& a, const Integer& b, Integer& g, Integer& x, Integer& y) {
  Integer old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    Integer q = old_r / r;
    Integer tmp = old_r - q * r;
    old_r = r;
    r = tmp;
    tmp = old_s - q * s;
    old_s = s;
    s = tmp;
    tmp = old_t - q * t;
    old_t = t;
    t = tmp;
  }
  if (old_r < 0) {
    old_r = -old_r;
    old_s = -old_s;
    old_t = -old_t;
  }
  g = old_r;
  x = old_s;
  y = old_t;
}

}  // namespace

std::vector<std::vector<Integer>> lower_hermite_basis(const std::vector<IntVec>& columns) {
  const std::size_t n = columns.size();
  std::vector<std::vector<Integer>> col(n, std::vector<Integer>(n));
  for (std::size_t j = 0; j < n; ++j) {
    if (columns[j].size() != n) throw Error(ErrorCode::DimensionMismatch, "lower_hermite_basis: non-square");
    for (std::size_t i = 0; i < n; ++i) col[j][i] = columns[j][i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (col[j][i] == 0) continue;
      Integer a = col[i][i], b = col[j][i], g, x, y;
      extended_gcd(a, b, g, x, y);
      Integer ag = a / g, bg = b / g;
      for (std::size_t r = 0; r < n; ++r) {
        Integer ci = col[i][r], cj = col[j][r];
        col[i][r] = x * ci + y * cj;
        col[j][r] = bg * ci - ag * cj;
      }
    }
    if (col[i][i] == 0) throw Error(ErrorCode::NotFullDimensional, "lattice basis is singular");
    if (col[i][i] < 0)
      for (auto& e : col[i]) e = -e;
  }
  return col;
}

}  // namespace reebcone::linalg
