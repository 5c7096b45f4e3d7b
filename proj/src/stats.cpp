#include "depriv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "depriv/parallel.hpp"

namespace depriv::stats {

namespace {

constexpr double kSeparationBound = 30.0;

double mean_of(const std::vector<double>& v) {
  return pairwise_sum(v) / static_cast<double>(v.size());
}

}  // namespace

void DesignMatrix::validate() const {
  const std::size_t n = X.rows;
  const std::size_t p = X.cols;
  if (y.size() != n) {
    throw DeprivError(ErrorFamily::Stats, "BAD_DESIGN", "response length mismatch");
  }
  if (n <= p) {
    throw DeprivError(ErrorFamily::Stats, "BAD_DESIGN",
                      "need more observations than parameters");
  }
  for (double v : y) {
    if (!std::isfinite(v)) {
      throw DeprivError(ErrorFamily::Stats, "BAD_DESIGN", "non-finite response value");
    }
  }
  for (double v : X.a) {
    if (!std::isfinite(v)) {
      throw DeprivError(ErrorFamily::Stats, "BAD_DESIGN", "non-finite design value");
    }
  }
  if (p <= 1) return;

  // Collinearity check: smallest singular value of the centered, column-scaled
  // regressors (intercept excluded) must exceed 1e-10. A centered column with
  // vanishing norm is constant, i.e. collinear with the intercept.
  const std::size_t q = p - 1;
  linalg::Matrix Z(n, q);
  for (std::size_t j = 0; j < q; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += X(i, j + 1);
    mean /= static_cast<double>(n);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Z(i, j) = X(i, j + 1) - mean;
      norm += Z(i, j) * Z(i, j);
    }
    norm = std::sqrt(norm);
    if (norm <= 1e-10) {
      const std::string name = j + 1 < names.size() ? names[j + 1] : "column " + std::to_string(j + 1);
      throw DeprivError(ErrorFamily::Stats, "SINGULAR_DESIGN",
                        "constant regressor: " + name);
    }
    for (std::size_t i = 0; i < n; ++i) Z(i, j) /= norm;
  }
  linalg::Matrix gram(q, q);
  for (std::size_t a = 0; a < q; ++a) {
    for (std::size_t b = a; b < q; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += Z(i, a) * Z(i, b);
      gram(a, b) = s;
      gram(b, a) = s;
    }
  }
  const auto eig = linalg::jacobi_eigen(gram);
  const double min_sv = std::sqrt(std::max(eig.values.back(), 0.0));
  if (min_sv <= 1e-10) {
    throw DeprivError(ErrorFamily::Stats, "SINGULAR_DESIGN",
                      "design matrix is rank deficient (collinear regressors)");
  }
}

RegressionFit ols_fit(const DesignMatrix& d, HcFlavor flavor) {
  d.validate();
  const std::size_t n = d.X.rows;
  const std::size_t p = d.X.cols;

  linalg::Matrix r_inv;
  const auto beta = linalg::qr_solve(d.X, d.y, &d.names, &r_inv);

  std::vector<double> resid(n);
  for (std::size_t i = 0; i < n; ++i) {
    double fit = 0.0;
    for (std::size_t j = 0; j < p; ++j) fit += d.X(i, j) * beta[j];
    resid[i] = d.y[i] - fit;
  }

  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = resid[i] * resid[i];
  const double ssr = pairwise_sum(sq);
  const double ybar = mean_of(d.y);
  for (std::size_t i = 0; i < n; ++i) {
    const double dy = d.y[i] - ybar;
    sq[i] = dy * dy;
  }
  const double sst = pairwise_sum(sq);

  // Sandwich: (X'X)^-1 X' diag(e^2) X (X'X)^-1 with (X'X)^-1 = R^-1 R^-T.
  linalg::Matrix bread(p, p);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) {
      double s = 0.0;
      for (std::size_t k = 0; k < p; ++k) s += r_inv(a, k) * r_inv(b, k);
      bread(a, b) = s;
    }
  linalg::Matrix meat(p, p);
  for (std::size_t i = 0; i < n; ++i) {
    const double e2 = resid[i] * resid[i];
    for (std::size_t a = 0; a < p; ++a) {
      const double xa = d.X(i, a) * e2;
      for (std::size_t b = a; b < p; ++b) meat(a, b) += xa * d.X(i, b);
    }
  }
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < a; ++b) meat(a, b) = meat(b, a);

  auto sandwich = linalg::matmul(linalg::matmul(bread, meat), bread);
  if (flavor == HcFlavor::HC1) {
    const double scale = static_cast<double>(n) / static_cast<double>(n - p);
    for (double& v : sandwich.a) v *= scale;
  }

  RegressionFit fit;
  fit.model = ModelKind::OLS;
  fit.names = d.names;
  fit.coef = beta;
  fit.cov.assign(p, std::vector<double>(p, 0.0));
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) fit.cov[a][b] = sandwich(a, b);
  fit.n_obs = static_cast<std::int64_t>(n);
  fit.r2 = sst == 0.0 ? 0.0 : 1.0 - ssr / sst;
  fit.converged = true;

  const double df = static_cast<double>(n - p);
  fit.p_values.resize(p);
  for (std::size_t k = 0; k < p; ++k) {
    const double se = std::sqrt(fit.cov[k][k]);
    fit.p_values[k] = se > 0.0 ? t_two_sided_p(beta[k] / se, df) : 0.0;
  }
  return fit;
}

double logistic_loglik(const DesignMatrix& d, const std::vector<double>& beta) {
  const std::size_t n = d.X.rows;
  const std::size_t p = d.X.cols;
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < p; ++j) eta += d.X(i, j) * beta[j];
    // y*eta - log(1 + exp(eta)), written with log1p for stability.
    const double log1pe = eta > 0.0 ? eta + std::log1p(std::exp(-eta))
                                    : std::log1p(std::exp(eta));
    terms[i] = d.y[i] * eta - log1pe;
  }
  return pairwise_sum(terms);
}

std::vector<double> logistic_gradient(const DesignMatrix& d,
                                      const std::vector<double>& beta) {
  const std::size_t n = d.X.rows;
  const std::size_t p = d.X.cols;
  std::vector<double> grad(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < p; ++j) eta += d.X(i, j) * beta[j];
    const double mu = 1.0 / (1.0 + std::exp(-eta));
    const double r = d.y[i] - mu;
    for (std::size_t j = 0; j < p; ++j) grad[j] += d.X(i, j) * r;
  }
  return grad;
}

RegressionFit logistic_fit(const DesignMatrix& d) {
  d.validate();
  const std::size_t n = d.X.rows;
  const std::size_t p = d.X.cols;

  std::int64_t ones = 0;
  for (double v : d.y) {
    if (v != 0.0 && v != 1.0) {
      throw DeprivError(ErrorFamily::Stats, "BAD_DESIGN",
                        "logistic response must be 0/1");
    }
    if (v == 1.0) ++ones;
  }
  if (ones == 0 || ones == static_cast<std::int64_t>(n)) {
    throw DeprivError(ErrorFamily::Stats, "BOTH_CLASSES_REQUIRED",
                      "logistic response has a single class");
  }

  std::vector<double> beta(p, 0.0);
  linalg::Matrix info(p, p);
  bool converged = false;
  bool separated = false;

  for (int iter = 0; iter < 100; ++iter) {
    // Score and observed information at the current beta.
    std::vector<double> score(p, 0.0);
    info = linalg::Matrix(p, p);
    for (std::size_t i = 0; i < n; ++i) {
      double eta = 0.0;
      for (std::size_t j = 0; j < p; ++j) eta += d.X(i, j) * beta[j];
      const double mu = 1.0 / (1.0 + std::exp(-eta));
      const double w = std::max(mu * (1.0 - mu), 1e-12);
      const double r = d.y[i] - mu;
      for (std::size_t a = 0; a < p; ++a) {
        score[a] += d.X(i, a) * r;
        const double xa = d.X(i, a) * w;
        for (std::size_t b = a; b < p; ++b) info(a, b) += xa * d.X(i, b);
      }
    }
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < a; ++b) info(a, b) = info(b, a);

    const auto delta = linalg::cholesky_solve(info, score);
    double max_step = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      beta[j] += delta[j];
      max_step = std::max(max_step, std::fabs(delta[j]));
    }
    if (std::any_of(beta.begin(), beta.end(),
                    [](double b) { return std::fabs(b) > kSeparationBound; })) {
      separated = true;
      break;
    }
    if (max_step < 1e-10) {
      converged = true;
      break;
    }
  }

  RegressionFit fit;
  fit.model = ModelKind::Logistic;
  fit.names = d.names;
  fit.coef = beta;
  fit.n_obs = static_cast<std::int64_t>(n);
  fit.converged = converged && !separated;
  if (separated) fit.warnings.push_back("SEPARATION");

  const auto cov = linalg::spd_inverse(info);
  fit.cov.assign(p, std::vector<double>(p, 0.0));
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) fit.cov[a][b] = cov(a, b);

  // McFadden pseudo-R^2 against the closed-form intercept-only likelihood.
  const double pbar = static_cast<double>(ones) / static_cast<double>(n);
  const double ll_null = static_cast<double>(ones) * std::log(pbar) +
                         static_cast<double>(n - ones) * std::log(1.0 - pbar);
  const double ll = logistic_loglik(d, beta);
  fit.r2 = 1.0 - ll / ll_null;

  fit.p_values.resize(p);
  for (std::size_t k = 0; k < p; ++k) {
    const double se = std::sqrt(fit.cov[k][k]);
    fit.p_values[k] = se > 0.0 ? normal_two_sided_p(beta[k] / se) : 0.0;
  }
  return fit;
}

double pearson_corr(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 3) {
    throw DeprivError(ErrorFamily::Validation, "BAD_INPUT",
                      "pearson_corr needs equal lengths >= 3");
  }
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  const std::size_t n = a.size();
  std::vector<double> prod(n), sa(n), sb(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    prod[i] = da * db;
    sa[i] = da * da;
    sb[i] = db * db;
  }
  const double va = pairwise_sum(sa);
  const double vb = pairwise_sum(sb);
  if (va == 0.0 || vb == 0.0) {
    throw DeprivError(ErrorFamily::Degenerate, "DEGENERATE_VARIANCE",
                      "pearson_corr input is constant");
  }
  return pairwise_sum(prod) / std::sqrt(va * vb);
}

double normal_two_sided_p(double z) {
  return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double t_two_sided_p(double t, double df) {
  if (df < 1.0) {
    throw DeprivError(ErrorFamily::Validation, "BAD_INPUT", "t distribution needs df >= 1");
  }
  const double x = df / (df + t * t);
  return incomplete_beta(0.5 * df, 0.5, x);
}

const char* to_string(Response r) {
  switch (r) {
    case Response::HD_POSITIVE: return "hd_positive";
    case Response::PCT_HD: return "pct_hd";
    case Response::DISPERSION: return "dispersion";
  }
  return "pct_hd";
}

BuildDesignResult build_design(const std::vector<RegionSummary>& regions,
                               const std::vector<std::string>& covariates,
                               Response response) {
  for (const auto& c : covariates) {
    if (c != "percpov" && c != "log(popdens)" && c != "percblk" && c != "percwht") {
      throw DeprivError(ErrorFamily::Config, "BAD_COVARIATE",
                        "unknown covariate: " + c);
    }
  }

  BuildDesignResult out;
  std::vector<std::vector<double>> rows;
  std::vector<double> ys;

  for (const auto& r : regions) {
    std::vector<double> row;
    row.push_back(1.0);
    bool missing = false;
    bool log_domain = false;
    for (const auto& c : covariates) {
      if (c == "percpov") {
        if (!r.percpov) missing = true;
        else row.push_back(*r.percpov);
      } else if (c == "log(popdens)") {
        if (!r.popdens) missing = true;
        else if (*r.popdens <= 0.0) log_domain = true;
        else row.push_back(std::log(*r.popdens));
      } else if (c == "percblk") {
        if (!r.percblk) missing = true;
        else row.push_back(*r.percblk);
      } else {
        if (!r.percwht) missing = true;
        else row.push_back(*r.percwht);
      }
      if (missing || log_domain) break;
    }
    double y = 0.0;
    if (!missing && !log_domain) {
      switch (response) {
        case Response::HD_POSITIVE:
          y = r.pct_high > 0.0 ? 1.0 : 0.0;
          break;
        case Response::PCT_HD:
          y = r.pct_high;
          break;
        case Response::DISPERSION:
          if (!r.dispersion) missing = true;
          else y = *r.dispersion;
          break;
      }
    }
    if (log_domain) {
      ++out.dropped_log_domain;
      continue;
    }
    if (missing) {
      ++out.dropped_missing;
      continue;
    }
    rows.push_back(std::move(row));
    ys.push_back(y);
  }

  DesignMatrix d;
  d.names.push_back("intercept");
  for (const auto& c : covariates) d.names.push_back(c);
  d.X = linalg::Matrix(rows.size(), covariates.size() + 1);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) d.X(i, j) = rows[i][j];
  d.y = std::move(ys);
  out.design = std::move(d);
  return out;
}

}  // namespace depriv::stats
