#include "lmd/procrustes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lmd/error.hpp"

namespace lmd {

namespace {

constexpr double kRotationThreshold = 1e-12;
constexpr int kMaxSweeps = 60;

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

// Replaces the rows of `basis` listed in `missing` with unit vectors
// orthogonal to every other row. Rows hold the basis vectors.
void complete_basis(Matrix& basis, const std::vector<bool>& missing) {
  const std::size_t n = basis.cols();
  std::vector<double> cand(n);
  std::size_t next_axis = 0;
  for (std::size_t k = 0; k < basis.rows(); ++k) {
    if (!missing[k]) continue;
    bool placed = false;
    while (!placed && next_axis < n) {
      std::fill(cand.begin(), cand.end(), 0.0);
      cand[next_axis++] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < basis.rows(); ++j) {
          if (j == k || (missing[j] && j > k)) continue;
          auto bj = basis.row(j);
          const double proj = dot(cand, bj);
          for (std::size_t i = 0; i < n; ++i) cand[i] -= proj * bj[i];
        }
      }
      const double nrm = norm2(cand);
      if (nrm > 1e-3) {
        auto bk = basis.row(k);
        for (std::size_t i = 0; i < n; ++i) bk[i] = cand[i] / nrm;
        placed = true;
      }
    }
    if (!placed) throw ConvergenceError("svd: could not complete orthonormal basis");
  }
}

// Core routine for p >= q. Works on A^T so that each column is contiguous.
SvdResult jacobi_tall(const Matrix& m) {
  const std::size_t p = m.rows();
  const std::size_t q = m.cols();
  Matrix at = transpose(m);          // q x p, row j = column j of M
  Matrix vt = Matrix::identity(q);   // row j = column j of V

  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < q; ++i) {
      for (std::size_t j = i + 1; j < q; ++j) {
        auto ai = at.row(i);
        auto aj = at.row(j);
        const double alpha = dot(ai, ai);
        const double beta = dot(aj, aj);
        const double gamma = dot(ai, aj);
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= kRotationThreshold * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < p; ++k) {
          const double x = ai[k];
          const double y = aj[k];
          ai[k] = c * x - s * y;
          aj[k] = s * x + c * y;
        }
        auto vi = vt.row(i);
        auto vj = vt.row(j);
        for (std::size_t k = 0; k < q; ++k) {
          const double x = vi[k];
          const double y = vj[k];
          vi[k] = c * x - s * y;
          vj[k] = s * x + c * y;
        }
      }
    }
    converged = !rotated;
  }
  if (!converged)
    throw ConvergenceError("svd: no convergence after " + std::to_string(kMaxSweeps) + " sweeps");

  std::vector<double> sigma(q);
  for (std::size_t j = 0; j < q; ++j) sigma[j] = norm2(at.row(j));
  std::vector<std::size_t> order(q);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

  const double sigma_max = sigma[order[0]];
  const double cutoff = sigma_max * static_cast<double>(p) * std::numeric_limits<double>::epsilon();

  Matrix ut(q, p);   // row k = column k of U
  Matrix vs(q, q);   // row k = column k of V
  std::vector<double> sorted(q);
  std::vector<bool> missing(q, false);
  for (std::size_t k = 0; k < q; ++k) {
    const std::size_t j = order[k];
    sorted[k] = sigma[j];
    auto src_v = vt.row(j);
    std::copy(src_v.begin(), src_v.end(), vs.row(k).begin());
    if (sigma[j] > cutoff && sigma[j] > 0.0) {
      auto a = at.row(j);
      auto u = ut.row(k);
      for (std::size_t i = 0; i < p; ++i) u[i] = a[i] / sigma[j];
    } else {
      missing[k] = true;
    }
  }
  if (std::find(missing.begin(), missing.end(), true) != missing.end()) complete_basis(ut, missing);

  return {transpose(ut), std::move(sorted), transpose(vs)};
}

void apply_sign_convention(SvdResult& r) {
  for (std::size_t k = 0; k < r.u.cols(); ++k) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t i = 0; i < r.u.rows(); ++i) {
      const double a = std::abs(r.u(i, k));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (r.u(best, k) < 0.0) {
      for (std::size_t i = 0; i < r.u.rows(); ++i) r.u(i, k) = -r.u(i, k);
      for (std::size_t i = 0; i < r.v.rows(); ++i) r.v(i, k) = -r.v(i, k);
    }
  }
}

}  // namespace

SvdResult svd(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw DimensionError("svd: empty matrix " + shape(m));
  if (!all_finite(m.data())) throw DegenerateVectorError("svd: input has non-finite entries");
  SvdResult r;
  if (m.rows() >= m.cols()) {
    r = jacobi_tall(m);
  } else {
    SvdResult t = jacobi_tall(transpose(m));
    r = {std::move(t.v), std::move(t.singular_values), std::move(t.u)};
  }
  apply_sign_convention(r);
  return r;
}

ProcrustesResult orthogonal_procrustes(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw DimensionError("procrustes: X is " + shape(x) + " but Y is " + shape(y));
  if (x.rows() == 0 || x.cols() == 0) throw DimensionError("procrustes: empty input");
  const SvdResult s = svd(matmul(transpose(x), y));
  Matrix r = matmul(s.u, transpose(s.v));
  const double residual = frobenius_error(matmul(x, r), y);
  return {std::move(r), residual};
}

Matrix apply_map(const Matrix& x, const Matrix& r) {
  if (x.cols() != r.rows()) throw DimensionError("apply_map: X is " + shape(x) + " but R is " + shape(r));
  return matmul(x, r);
}

double frobenius_error(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("frobenius_error: " + shape(a) + " vs " + shape(b));
  double s = 0.0;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double diff = da[i] - db[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

}  // namespace lmd
