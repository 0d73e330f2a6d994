#pragma once

#include <vector>

#include "jetvar/expr.hpp"

namespace jetvar {

using Matrix = std::vector<std::vector<Expr>>;

Matrix zero_matrix(std::size_t rows, std::size_t cols);

/// Determinant by cofactor expansion, normalized.
Expr determinant(const Matrix& m);

/// Inverse via adjugate over determinant. Throws Error("singular matrix")
/// when the determinant normalizes to zero.
Matrix inverse(const Matrix& m);

}  // namespace jetvar
