#pragma once

// Regression machinery: OLS with HC robust covariance, logistic fits via
// IRLS, Pearson correlation, and the tail probabilities they need.

#include <optional>
#include <string>
#include <vector>

#include "depriv/linalg.hpp"
#include "depriv/types.hpp"

namespace depriv::stats {

struct DesignMatrix {
  std::vector<double> y;
  linalg::Matrix X;  // n x p with leading intercept column of ones
  std::vector<std::string> names;

  // Checks finiteness, n > p, and full column rank (smallest singular value
  // of the centered, scaled regressors > 1e-10). Throws SINGULAR_DESIGN
  // naming the offending column.
  void validate() const;
};

enum class HcFlavor { HC0, HC1 };

// Least squares via Householder QR; covariance is the HC sandwich
// (X'X)^-1 X' diag(e^2) X (X'X)^-1, scaled by n/(n-p) for HC1. Two-sided
// p-values from the t distribution with n-p degrees of freedom. R^2 is 0 by
// convention when SST == 0.
RegressionFit ols_fit(const DesignMatrix& d, HcFlavor flavor = HcFlavor::HC1);

// Maximum likelihood by iteratively reweighted least squares. Convergence:
// max |delta beta| < 1e-10 within 100 iterations. Covariance is the inverse
// observed information at the optimum; p-values two-sided normal; r2 is
// McFadden's 1 - l(beta)/l(intercept only). Coefficients diverging past 30
// stop the iteration with converged = false and a SEPARATION warning.
RegressionFit logistic_fit(const DesignMatrix& d);

// Log-likelihood of a logistic model at beta (used by tests for the
// finite-difference gradient check).
double logistic_loglik(const DesignMatrix& d, const std::vector<double>& beta);
std::vector<double> logistic_gradient(const DesignMatrix& d,
                                      const std::vector<double>& beta);

// Product-moment correlation; lengths must match and be >= 3, inputs
// non-constant.
double pearson_corr(const std::vector<double>& a, const std::vector<double>& b);

// Two-sided normal tail: p = erfc(|z| / sqrt(2)).
double normal_two_sided_p(double z);

// Two-sided Student t tail via the regularized incomplete beta function
// (continued fraction), df >= 1.
double t_two_sided_p(double t, double df);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

enum class Response { HD_POSITIVE, PCT_HD, DISPERSION };

const char* to_string(Response r);

struct BuildDesignResult {
  DesignMatrix design;
  std::int64_t dropped_missing = 0;    // regions lacking a requested covariate
  std::int64_t dropped_log_domain = 0; // popdens <= 0 under log
};

// Columns drawn from {percpov, log(popdens), percblk, percwht} in that order,
// behind a leading intercept. Regions missing a requested covariate (or the
// response) are dropped with counts reported.
BuildDesignResult build_design(const std::vector<RegionSummary>& regions,
                               const std::vector<std::string>& covariates,
                               Response response);

}  // namespace depriv::stats
