// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <vector>

#include "pumpmap/common.hpp"
#include "pumpmap/rng.hpp"

namespace pumpmap {

struct EigResult {
  std::vector<double> values;    // ascending distance from the shift
  Eigen::MatrixXd vectors;       // columns, M-orthonormal
  std::vector<double> residuals; // ||A x - l M x|| / ||l M x||
};

// Symmetric generalized eigenpairs of A x = lambda M x nearest the shift
// sigma. Shift-invert Lanczos on (A - sigma M)^{-1} M, which is self-adjoint
// in the M inner product (M symmetric positive definite). Full
// reorthogonalization; Krylov size grows until the requested pairs converge.
inline EigResult eig_nearest(const Eigen::SparseMatrix<double>& A,
                             const Eigen::SparseMatrix<double>& M, double sigma, int n_eig,
                             double tol = 1e-10, int m_start = 60, uint64_t seed = 12345) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || M.rows() != n || M.cols() != n)
    throw NumericError("eigensolver: dimension mismatch");
  if (n_eig < 1 || n_eig > n) throw NumericError("eigensolver: bad pair count");

  Eigen::SparseMatrix<double> K = A - sigma * M;
  K.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success)
    throw NumericError("eigensolver: shifted matrix factorization failed "
                       "(shift may equal an eigenvalue)");

  auto m_norm = [&](const Eigen::VectorXd& v) { return std::sqrt(v.dot(M * v)); };

  RngStream rng(seed, 0);
  for (int m = std::min(m_start, n);; m = std::min(2 * m, n)) {
    Eigen::MatrixXd Q(n, m);
    Eigen::VectorXd alpha(m), beta(m);
    Eigen::VectorXd q(n);
    for (int i = 0; i < n; ++i) q[i] = rng.uniform() - 0.5;
    q /= m_norm(q);
    Q.col(0) = q;

    int built = m;
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd w = lu.solve(M * Q.col(j));
      if (j > 0) w -= beta[j - 1] * Q.col(j - 1);
      alpha[j] = w.dot(M * Q.col(j));
      w -= alpha[j] * Q.col(j);
      // Full reorthogonalization in the M inner product, twice for safety.
      for (int pass = 0; pass < 2; ++pass) {
        Eigen::VectorXd Mw = M * w;
        for (int i = 0; i <= j; ++i) w -= Q.col(i).dot(Mw) * Q.col(i);
      }
      double b = m_norm(w);
      beta[j] = b;
      if (j + 1 < m) {
        if (b < 1e-12) {
          built = j + 1; // invariant subspace found
          break;
        }
        Q.col(j + 1) = w / b;
      }
    }

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(built, built);
    for (int j = 0; j < built; ++j) {
      T(j, j) = alpha[j];
      if (j + 1 < built) T(j, j + 1) = T(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    if (es.info() != Eigen::Success) throw NumericError("eigensolver: tridiagonal solve failed");

    // Largest |theta| of the inverted operator = eigenvalues nearest sigma.
    std::vector<int> order(built);
    for (int i = 0; i < built; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(es.eigenvalues()[a]) > std::abs(es.eigenvalues()[b]);
    });

    EigResult out;
    bool ok = built >= n_eig;
    for (int p = 0; ok && p < n_eig; ++p) {
      double theta = es.eigenvalues()[order[p]];
      if (std::abs(theta) < 1e-300) {
        ok = false;
        break;
      }
      double lambda = sigma + 1.0 / theta;
      Eigen::VectorXd x = Q.leftCols(built) * es.eigenvectors().col(order[p]);
      x /= m_norm(x);
      Eigen::VectorXd Ax = A * x, Mx = M * x;
      double denom = std::abs(lambda) * Mx.norm();
      if (denom <= 0.0) {
        ok = false;
        break;
      }
      double res = (Ax - lambda * Mx).norm() / denom;
      if (res > tol) {
        ok = false;
        break;
      }
      out.values.push_back(lambda);
      out.vectors.conservativeResize(n, p + 1);
      out.vectors.col(p) = x;
      out.residuals.push_back(res);
    }
    if (ok) return out;
    if (m >= n || m >= 960)
      throw NumericError("eigensolver: no convergence near shift after Krylov size " +
                         std::to_string(m));
  }
}

} // namespace pumpmap
