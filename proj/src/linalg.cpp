#include "depriv/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "depriv/types.hpp"

namespace depriv::linalg {

EigenResult jacobi_eigen(const Matrix& sym, int max_sweeps, double tol) {
  const std::size_t n = sym.rows;
  Matrix a = sym;
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return std::sqrt(2.0 * s);
  };

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::fabs(sym(i, j)));
  const double threshold = tol * std::max(scale, 1.0);

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (off_norm() <= threshold) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= threshold * 1e-3) continue;
        const double theta = 0.5 * (a(q, q) - a(p, p)) / apq;
        double t = 1.0 / (std::fabs(theta) + std::sqrt(1.0 + theta * theta));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        const double h = t * apq;

        a(p, p) -= h;
        a(q, q) += h;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == p || j == q) continue;
          const double ajp = a(j, p);
          const double ajq = a(j, q);
          a(j, p) = ajp - s * (ajq + tau * ajp);
          a(p, j) = a(j, p);
          a(j, q) = ajq + s * (ajp - tau * ajq);
          a(q, j) = a(j, q);
        }
        for (std::size_t j = 0; j < n; ++j) {
          const double vjp = v(j, p);
          const double vjq = v(j, q);
          v(j, p) = vjp - s * (vjq + tau * vjp);
          v(j, q) = vjq + s * (vjp - tau * vjq);
        }
      }
    }
  }
  if (sweep >= max_sweeps && off_norm() > threshold) {
    throw DeprivError(ErrorFamily::Degenerate, "NO_CONVERGENCE",
                      "jacobi sweeps exhausted without convergence");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenResult result;
  result.sweeps = sweep;
  result.values.reserve(n);
  result.vectors.reserve(n);
  for (std::size_t k : order) {
    result.values.push_back(a(k, k));
    std::vector<double> vec(n);
    for (std::size_t i = 0; i < n; ++i) vec[i] = v(i, k);
    const double norm = std::sqrt(std::inner_product(vec.begin(), vec.end(), vec.begin(), 0.0));
    for (double& x : vec) x /= norm;
    result.vectors.push_back(std::move(vec));
  }
  return result;
}

std::vector<double> qr_solve(const Matrix& X, const std::vector<double>& y,
                             const std::vector<std::string>* col_names,
                             Matrix* r_inv) {
  const std::size_t n = X.rows;
  const std::size_t p = X.cols;
  Matrix a = X;
  std::vector<double> b = y;

  double col_scale = 0.0;
  for (double x : a.a) col_scale = std::max(col_scale, std::fabs(x));
  const double singular_tol = 1e-12 * std::max(col_scale, 1.0) * static_cast<double>(n);

  for (std::size_t k = 0; k < p; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < n; ++i) norm += a(i, k) * a(i, k);
    norm = std::sqrt(norm);
    if (norm <= singular_tol) {
      const std::string name =
          col_names && k < col_names->size() ? (*col_names)[k] : "column " + std::to_string(k);
      throw DeprivError(ErrorFamily::Stats, "SINGULAR_DESIGN",
                        "design matrix is rank deficient at " + name);
    }
    const double alpha = a(k, k) >= 0.0 ? -norm : norm;
    // Householder vector u stored in column k below the diagonal, u_k implicit.
    const double ukk = a(k, k) - alpha;
    std::vector<double> u(n - k, 0.0);
    u[0] = ukk;
    for (std::size_t i = k + 1; i < n; ++i) u[i - k] = a(i, k);
    const double unorm2 = std::inner_product(u.begin(), u.end(), u.begin(), 0.0);
    a(k, k) = alpha;
    for (std::size_t i = k + 1; i < n; ++i) a(i, k) = 0.0;
    if (unorm2 > 0.0) {
      for (std::size_t j = k + 1; j < p; ++j) {
        double dot = 0.0;
        for (std::size_t i = k; i < n; ++i) dot += u[i - k] * a(i, j);
        const double f = 2.0 * dot / unorm2;
        for (std::size_t i = k; i < n; ++i) a(i, j) -= f * u[i - k];
      }
      double dot = 0.0;
      for (std::size_t i = k; i < n; ++i) dot += u[i - k] * b[i];
      const double f = 2.0 * dot / unorm2;
      for (std::size_t i = k; i < n; ++i) b[i] -= f * u[i - k];
    }
  }

  // Back substitution R beta = Qt y.
  std::vector<double> beta(p, 0.0);
  for (std::size_t kk = p; kk-- > 0;) {
    double s = b[kk];
    for (std::size_t j = kk + 1; j < p; ++j) s -= a(kk, j) * beta[j];
    beta[kk] = s / a(kk, kk);
  }

  if (r_inv) {
    // Invert upper-triangular R column by column.
    *r_inv = Matrix(p, p);
    for (std::size_t col = 0; col < p; ++col) {
      std::vector<double> e(p, 0.0);
      e[col] = 1.0;
      for (std::size_t kk = p; kk-- > 0;) {
        double s = e[kk];
        for (std::size_t j = kk + 1; j < p; ++j) s -= a(kk, j) * (*r_inv)(j, col);
        (*r_inv)(kk, col) = s / a(kk, kk);
      }
    }
  }
  return beta;
}

std::vector<double> cholesky_solve(Matrix A, std::vector<double> b) {
  const std::size_t n = A.rows;
  // In-place lower Cholesky.
  for (std::size_t j = 0; j < n; ++j) {
    double d = A(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= A(j, k) * A(j, k);
    if (d <= 0.0) {
      throw DeprivError(ErrorFamily::Stats, "SINGULAR_DESIGN",
                        "matrix not positive definite in cholesky");
    }
    A(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = A(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= A(i, k) * A(j, k);
      A(i, j) = s / A(j, j);
    }
  }
  // Forward then backward substitution.
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= A(i, k) * b[k];
    b[i] = s / A(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A(k, i) * b[k];
    b[i] = s / A(i, i);
  }
  return b;
}

Matrix spd_inverse(const Matrix& A) {
  const std::size_t n = A.rows;
  Matrix inv(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<double> e(n, 0.0);
    e[col] = 1.0;
    auto x = cholesky_solve(A, std::move(e));
    for (std::size_t i = 0; i < n; ++i) inv(i, col) = x[i];
  }
  // Symmetrize against round-off.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double m = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = m;
      inv(j, i) = m;
    }
  return inv;
}

Matrix matmul(const Matrix& A, const Matrix& B) {
  Matrix C(A.rows, B.cols);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t k = 0; k < A.cols; ++k) {
      const double aik = A(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
    }
  return C;
}

Matrix transpose(const Matrix& A) {
  Matrix T(A.cols, A.rows);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
  return T;
}

}  // namespace depriv::linalg
