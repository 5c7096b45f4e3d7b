#pragma once

// Small dense linear algebra for the 4x4 eigenproblem and the n x p (p <= 5)
// regression solves. Matrices are row-major vectors of doubles.

#include <cstddef>
#include <string>
#include <vector>

namespace depriv::linalg {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

struct EigenResult {
  std::vector<double> values;            // descending
  std::vector<std::vector<double>> vectors;  // vectors[k] pairs with values[k], unit norm
  int sweeps = 0;
};

// Cyclic Jacobi sweeps on a symmetric matrix. Throws
// DeprivError(Degenerate, NO_CONVERGENCE) after max_sweeps without reaching
// off-diagonal norm below tol.
EigenResult jacobi_eigen(const Matrix& sym, int max_sweeps = 10000, double tol = 1e-14);

// Householder QR least squares: minimizes ||y - X b||_2. X is n x p, n >= p.
// Throws DeprivError(Stats, SINGULAR_DESIGN) naming the offending column when
// a diagonal of R collapses. Returns b and fills r_inv (p x p upper-triangular
// inverse of R) when non-null, so callers can form (X'X)^-1 = R^-1 R^-T.
std::vector<double> qr_solve(const Matrix& X, const std::vector<double>& y,
                             const std::vector<std::string>* col_names = nullptr,
                             Matrix* r_inv = nullptr);

// Cholesky solve of a symmetric positive-definite system A x = b.
std::vector<double> cholesky_solve(Matrix A, std::vector<double> b);

// Inverse of a small SPD matrix via Cholesky.
Matrix spd_inverse(const Matrix& A);

Matrix matmul(const Matrix& A, const Matrix& B);
Matrix transpose(const Matrix& A);

}  // namespace depriv::linalg
