#include "jetvar/matrix.hpp"

namespace jetvar {

namespace {

Matrix minor_of(const Matrix& m, std::size_t row, std::size_t col) {
  Matrix out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i == row) continue;
    std::vector<Expr> r;
    for (std::size_t j = 0; j < m.size(); ++j)
      if (j != col) r.push_back(m[i][j]);
    out.push_back(std::move(r));
  }
  return out;
}

Expr det_raw(const Matrix& m) {
  std::size_t n = m.size();
  if (n == 0) return Expr(1);
  if (n == 1) return m[0][0];
  if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  std::vector<Expr> terms;
  for (std::size_t j = 0; j < n; ++j) {
    if (m[0][j].is_zero()) continue;
    Expr c = m[0][j] * det_raw(minor_of(m, 0, j));
    terms.push_back(j % 2 ? -c : c);
  }
  return Expr::add(std::move(terms));
}

}  // namespace

Matrix zero_matrix(std::size_t rows, std::size_t cols) {
  return Matrix(rows, std::vector<Expr>(cols, Expr(0)));
}

Expr determinant(const Matrix& m) {
  for (const auto& r : m)
    if (r.size() != m.size()) throw Error("determinant of non-square matrix");
  return normalize(det_raw(m));
}

Matrix inverse(const Matrix& m) {
  Expr det = determinant(m);
  if (det.is_zero()) throw Error("singular matrix");
  std::size_t n = m.size();
  Expr inv_det = pow(det, -1);
  Matrix out = zero_matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Expr cof = n == 1 ? Expr(1) : det_raw(minor_of(m, j, i));
      if ((i + j) % 2) cof = -cof;
      out[i][j] = normalize(cof * inv_det);
    }
  }
  return out;
}

}  // namespace jetvar
