#pragma once

#include <vector>

#include "lmd/matrix.hpp"

namespace lmd {

// Thin SVD M = U diag(s) V^T with r = min(p, q).
struct SvdResult {
  Matrix u;                              // p x r, orthonormal columns
  std::vector<double> singular_values;   // r values, descending, >= 0
  Matrix v;                              // q x r, orthonormal columns
};

// One-sided Jacobi SVD. A column pair is rotated while its normalized inner
// product exceeds 1e-12; more than 60 sweeps raises ConvergenceError.
// Sign convention: in every column of U the largest-magnitude entry (lowest
// row on ties) is positive, and the matching V column is flipped with it.
SvdResult svd(const Matrix& m);

struct ProcrustesResult {
  Matrix r;          // d x d orthogonal
  double residual;   // ||X R - Y||_F
};

// argmin over orthogonal R of ||X R - Y||_F, via R = U V^T from svd(X^T Y).
// Reflections are allowed; there is no determinant correction and no
// centering or scaling of the inputs.
ProcrustesResult orthogonal_procrustes(const Matrix& x, const Matrix& y);

Matrix apply_map(const Matrix& x, const Matrix& r);

double frobenius_error(const Matrix& a, const Matrix& b);

}  // namespace lmd
