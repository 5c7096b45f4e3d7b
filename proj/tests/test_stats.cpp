#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "depriv/stats.hpp"
#include "test_support.hpp"

using namespace depriv;
using stats::DesignMatrix;

using test_support::brute_ols_hc;

namespace {

DesignMatrix simple_design(const std::vector<double>& x, const std::vector<double>& y) {
  DesignMatrix d;
  d.names = {"intercept", "x"};
  d.y = y;
  d.X = linalg::Matrix(x.size(), 2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    d.X(i, 0) = 1.0;
    d.X(i, 1) = x[i];
  }
  return d;
}

DesignMatrix random_design(std::mt19937& rng, std::size_t n, std::size_t q,
                           bool binary_y) {
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  std::bernoulli_distribution coin(0.5);
  DesignMatrix d;
  d.names.push_back("intercept");
  for (std::size_t j = 0; j < q; ++j) d.names.push_back("x" + std::to_string(j));
  d.X = linalg::Matrix(n, q + 1);
  d.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.X(i, 0) = 1.0;
    for (std::size_t j = 0; j < q; ++j) d.X(i, j + 1) = val(rng);
    d.y[i] = binary_y ? (coin(rng) ? 1.0 : 0.0) : val(rng) * 2.0;
  }
  if (binary_y) {
    d.y[0] = 0.0;  // both classes always present
    d.y[1] = 1.0;
  }
  return d;
}

}  // namespace

TEST_CASE("ols on the 5-point fixture matches the hand-computed values") {
  // x = (1..5), y = (2,2,4,4,6). Hand matrix arithmetic: X'X = [[5,15],[15,55]],
  // X'y = (18,64) -> beta = (0.6, 1.0); residuals (.4,-.6,.4,-.6,.4);
  // HC1 cov = 5/3 * [[0.228,-0.06],[-0.06,0.02]] = [[0.38,-0.1],[-0.1,1/30]].
  const auto d = simple_design({1, 2, 3, 4, 5}, {2, 2, 4, 4, 6});
  const auto fit = stats::ols_fit(d, stats::HcFlavor::HC1);

  CHECK(fit.coef[0] == doctest::Approx(0.6).epsilon(1e-10));
  CHECK(fit.coef[1] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fit.cov[0][0] == doctest::Approx(0.38).epsilon(1e-10));
  CHECK(fit.cov[0][1] == doctest::Approx(-0.1).epsilon(1e-10));
  CHECK(fit.cov[1][1] == doctest::Approx(1.0 / 30.0).epsilon(1e-10));
  const auto se = fit.standard_errors();
  CHECK(se[0] == doctest::Approx(std::sqrt(19.0 / 50.0)).epsilon(1e-10));
  CHECK(se[1] == doctest::Approx(std::sqrt(1.0 / 30.0)).epsilon(1e-10));

  const auto brute = brute_ols_hc(d, true);
  for (std::size_t a = 0; a < 2; ++a) {
    CHECK(fit.coef[a] == doctest::Approx(brute.beta[a]).epsilon(1e-12));
    for (std::size_t b = 0; b < 2; ++b) {
      CHECK(fit.cov[a][b] == doctest::Approx(brute.cov[a][b]).epsilon(1e-12));
    }
  }
}

TEST_CASE("hc covariance equals the brute-force sandwich on random problems") {
  std::mt19937 rng(808);
  std::uniform_int_distribution<std::size_t> n_of(10, 50);
  std::uniform_int_distribution<std::size_t> q_of(1, 3);
  for (int rep = 0; rep < 25; ++rep) {
    const auto d = random_design(rng, n_of(rng), q_of(rng), false);
    for (auto flavor : {stats::HcFlavor::HC0, stats::HcFlavor::HC1}) {
      const auto fit = stats::ols_fit(d, flavor);
      const auto brute = brute_ols_hc(d, flavor == stats::HcFlavor::HC1);
      for (std::size_t a = 0; a < fit.coef.size(); ++a) {
        for (std::size_t b = 0; b < fit.coef.size(); ++b) {
          const double rel = std::fabs(fit.cov[a][b] - brute.cov[a][b]) /
                             std::max(std::fabs(brute.cov[a][b]), 1e-30);
          CHECK(rel < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("ols residual orthogonality") {
  std::mt19937 rng(909);
  for (int rep = 0; rep < 10; ++rep) {
    const auto d = random_design(rng, 40, 3, false);
    const auto fit = stats::ols_fit(d);
    double ynorm = 0.0;
    for (double v : d.y) ynorm += v * v;
    ynorm = std::sqrt(ynorm);
    for (std::size_t j = 0; j < d.X.cols; ++j) {
      double dot = 0.0;
      for (std::size_t i = 0; i < d.X.rows; ++i) {
        double fitv = 0.0;
        for (std::size_t k = 0; k < d.X.cols; ++k) fitv += d.X(i, k) * fit.coef[k];
        dot += d.X(i, j) * (d.y[i] - fitv);
      }
      CHECK(std::fabs(dot) < 1e-8 * ynorm);
    }
  }
}

TEST_CASE("noiseless line is interpolated exactly") {
  std::vector<double> x(10), y(10);
  for (int i = 0; i < 10; ++i) {
    x[i] = i + 1;
    y[i] = 3.0 + 2.0 * x[i];
  }
  const auto fit = stats::ols_fit(simple_design(x, y));
  CHECK(fit.coef[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.coef[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.r2 == 1.0);  // exactly
}

TEST_CASE("constant response uses the zero-SST convention") {
  const auto fit = stats::ols_fit(simple_design({1, 2, 3, 4}, {7, 7, 7, 7}));
  CHECK(fit.coef[0] == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(std::fabs(fit.coef[1]) < 1e-12);
  CHECK(fit.r2 == 0.0);
}

TEST_CASE("singular designs are rejected with the offending column") {
  DesignMatrix d;
  d.names = {"intercept", "a", "b"};
  d.y = {1, 2, 3, 4};
  d.X = linalg::Matrix(4, 3);
  for (std::size_t i = 0; i < 4; ++i) {
    d.X(i, 0) = 1.0;
    d.X(i, 1) = static_cast<double>(i);
    d.X(i, 2) = 2.0 * static_cast<double>(i);  // collinear with a
  }
  CHECK_THROWS_AS(stats::ols_fit(d), DeprivError);

  DesignMatrix c;
  c.names = {"intercept", "const_col"};
  c.y = {1, 2, 3};
  c.X = linalg::Matrix(3, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    c.X(i, 0) = 1.0;
    c.X(i, 1) = 5.0;
  }
  CHECK_THROWS_WITH_AS(stats::ols_fit(c), "SINGULAR_DESIGN: constant regressor: const_col",
                       DeprivError);
}

TEST_CASE("logistic intercept-only fit recovers the logit of the mean") {
  DesignMatrix d;
  d.names = {"intercept"};
  d.y = {1, 1, 1, 0};
  d.X = linalg::Matrix(4, 1);
  for (int i = 0; i < 4; ++i) d.X(i, 0) = 1.0;
  const auto fit = stats::logistic_fit(d);
  CHECK(fit.converged);
  CHECK(fit.coef[0] == doctest::Approx(std::log(3.0)).epsilon(1e-8));
  CHECK(std::fabs(fit.r2) < 1e-10);  // pseudo-R^2 of the null model
}

TEST_CASE("balanced response orthogonal to x has zero slope") {
  const auto d = simple_design({-1, -1, 1, 1}, {0, 1, 0, 1});
  const auto fit = stats::logistic_fit(d);
  CHECK(std::fabs(fit.coef[1]) < 1e-10);
  CHECK(std::fabs(fit.coef[0]) < 1e-10);
}

TEST_CASE("single-class response is rejected") {
  const auto d = simple_design({1, 2, 3, 4}, {1, 1, 1, 1});
  CHECK_THROWS_AS(stats::logistic_fit(d), DeprivError);
}

TEST_CASE("complete separation is reported, not crashed") {
  const auto d = simple_design({-2, -1, 1, 2}, {0, 0, 1, 1});
  const auto fit = stats::logistic_fit(d);
  CHECK_FALSE(fit.converged);
  REQUIRE(!fit.warnings.empty());
  CHECK(fit.warnings[0] == "SEPARATION");
}

TEST_CASE("logistic gradient matches central finite differences") {
  std::mt19937 rng(2718);
  std::uniform_real_distribution<double> bval(-0.5, 0.5);
  for (int rep = 0; rep < 10; ++rep) {
    const auto d = random_design(rng, 40, 2, true);
    std::vector<double> beta(3);
    for (auto& b : beta) b = bval(rng);
    const auto grad = stats::logistic_gradient(d, beta);
    for (std::size_t k = 0; k < beta.size(); ++k) {
      auto bp = beta, bm = beta;
      bp[k] += 1e-5;
      bm[k] -= 1e-5;
      const double fd =
          (stats::logistic_loglik(d, bp) - stats::logistic_loglik(d, bm)) / 2e-5;
      const double rel = std::fabs(grad[k] - fd) / std::max(std::fabs(fd), 1e-8);
      CHECK(rel < 1e-4);
    }
  }
}

TEST_CASE("logistic score vanishes at the optimum") {
  std::mt19937 rng(3141);
  for (int rep = 0; rep < 10; ++rep) {
    auto d = random_design(rng, 200, 2, true);
    // Plant a real signal so the fit is interior.
    for (std::size_t i = 0; i < d.X.rows; ++i) {
      const double eta = -0.3 + 0.8 * d.X(i, 1);
      const double p = 1.0 / (1.0 + std::exp(-eta));
      d.y[i] = std::bernoulli_distribution(p)(rng) ? 1.0 : 0.0;
    }
    std::int64_t ones = 0;
    for (double v : d.y) ones += v == 1.0;
    if (ones == 0 || ones == static_cast<std::int64_t>(d.y.size())) continue;
    const auto fit = stats::logistic_fit(d);
    if (!fit.converged) continue;
    const auto grad = stats::logistic_gradient(d, fit.coef);
    for (double g : grad) CHECK(std::fabs(g) < 1e-8);
    CHECK(fit.r2 >= 0.0);
    CHECK(fit.r2 < 1.0);
  }
}

TEST_CASE("affine equivariance of coefficients and p-values") {
  std::mt19937 rng(161803);
  const double c = 3.7;

  auto d = random_design(rng, 60, 2, false);
  const auto base = stats::ols_fit(d);
  auto scaled = d;
  for (std::size_t i = 0; i < scaled.X.rows; ++i) scaled.X(i, 1) *= c;
  const auto after = stats::ols_fit(scaled);
  CHECK(after.coef[1] == doctest::Approx(base.coef[1] / c).epsilon(1e-10));
  CHECK(after.p_values[1] == doctest::Approx(base.p_values[1]).epsilon(1e-8));

  auto dl = random_design(rng, 200, 1, true);
  const auto lbase = stats::logistic_fit(dl);
  auto lscaled = dl;
  for (std::size_t i = 0; i < lscaled.X.rows; ++i) lscaled.X(i, 1) *= c;
  const auto lafter = stats::logistic_fit(lscaled);
  CHECK(lafter.coef[1] == doctest::Approx(lbase.coef[1] / c).epsilon(1e-8));
  CHECK(lafter.p_values[1] == doctest::Approx(lbase.p_values[1]).epsilon(1e-8));
}

TEST_CASE("monte-carlo logistic recovery") {
  std::mt19937 rng(5000);
  std::uniform_real_distribution<double> xval(0.0, 100.0);
  const std::vector<double> truth = {-3.0, 0.08};
  const std::size_t n = 5000;
  DesignMatrix d;
  d.names = {"intercept", "x"};
  d.X = linalg::Matrix(n, 2);
  d.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = xval(rng);
    d.X(i, 0) = 1.0;
    d.X(i, 1) = x;
    const double p = 1.0 / (1.0 + std::exp(-(truth[0] + truth[1] * x)));
    d.y[i] = std::bernoulli_distribution(p)(rng) ? 1.0 : 0.0;
  }
  const auto fit = stats::logistic_fit(d);
  CHECK(fit.converged);
  const auto se = fit.standard_errors();
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(std::fabs(fit.coef[k] - truth[k]) < 3.0 * se[k]);
  }
}

TEST_CASE("fit covariances are symmetric with nonnegative diagonals") {
  std::mt19937 rng(424242);
  for (int rep = 0; rep < 10; ++rep) {
    const auto d = random_design(rng, 60, 3, false);
    const auto dl = random_design(rng, 120, 2, true);
    for (const auto& fit : {stats::ols_fit(d), stats::logistic_fit(dl)}) {
      const std::size_t p = fit.coef.size();
      for (std::size_t a = 0; a < p; ++a) {
        CHECK(fit.cov[a][a] >= 0.0);
        for (std::size_t b = 0; b < p; ++b) {
          const double scale = std::max(std::fabs(fit.cov[a][b]), 1e-30);
          CHECK(std::fabs(fit.cov[a][b] - fit.cov[b][a]) / scale < 1e-8);
        }
      }
    }
  }
}

TEST_CASE("pearson correlation") {
  CHECK(stats::pearson_corr({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(stats::pearson_corr({1, 2, 3}, {5, 3, 1}) ==
        doctest::Approx(-1.0).epsilon(1e-14));  // b = -2a + 7
  CHECK(stats::pearson_corr({1, 2, 3}, {1, 3, 2}) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(stats::pearson_corr({1, 1, 1}, {1, 2, 3}), DeprivError);
  CHECK_THROWS_AS(stats::pearson_corr({1, 2}, {1, 2}), DeprivError);
}

TEST_CASE("tail probabilities") {
  CHECK(stats::normal_two_sided_p(0.0) == 1.0);
  CHECK(std::fabs(stats::normal_two_sided_p(1.959964) - 0.05) < 1e-5);
  CHECK(stats::normal_two_sided_p(2.5) == doctest::Approx(0.012419330651552).epsilon(1e-9));

  CHECK(stats::t_two_sided_p(0.0, 5.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(stats::t_two_sided_p(2.0, 10.0) ==
        doctest::Approx(0.07338803477074).epsilon(1e-9));
  CHECK(stats::t_two_sided_p(2.5, 3.0) ==
        doctest::Approx(0.08770664700807).epsilon(1e-9));
  CHECK(stats::t_two_sided_p(1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-9));
  // df -> infinity approaches the normal tail
  CHECK(std::fabs(stats::t_two_sided_p(2.0, 5e6) - stats::normal_two_sided_p(2.0)) < 1e-6);

  CHECK(stats::incomplete_beta(1.0, 1.0, 0.37) == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("build_design shapes and drops") {
  auto region = [](const std::string& id, double pct_high, double percpov,
                   std::optional<double> popdens,
                   std::optional<double> dispersion = std::nullopt) {
    RegionSummary r;
    r.region_id = id;
    r.pct_high = pct_high;
    r.percpov = percpov;
    r.popdens = popdens;
    r.percblk = 20.0;
    r.percwht = 60.0;
    r.dispersion = dispersion;
    return r;
  };

  SUBCASE("intercept plus percpov over 3 regions is 3x2") {
    const std::vector<RegionSummary> regions = {region("a", 0, 10, 100.0),
                                                region("b", 25, 20, 100.0),
                                                region("c", 50, 30, 100.0)};
    const auto built = stats::build_design(regions, {"percpov"}, stats::Response::PCT_HD);
    CHECK(built.design.X.rows == 3);
    CHECK(built.design.X.cols == 2);
    CHECK(built.design.names == std::vector<std::string>{"intercept", "percpov"});
  }
  SUBCASE("hd_positive maps pct_high to an indicator") {
    const std::vector<RegionSummary> regions = {region("a", 0, 10, 100.0),
                                                region("b", 25, 20, 100.0)};
    const auto built =
        stats::build_design(regions, {"percpov"}, stats::Response::HD_POSITIVE);
    CHECK(built.design.y == std::vector<double>{0.0, 1.0});
  }
  SUBCASE("zero popdens under log is dropped with a reason") {
    const std::vector<RegionSummary> regions = {region("a", 0, 10, 0.0),
                                                region("b", 25, 20, 100.0),
                                                region("c", 50, 30, 50.0)};
    const auto built = stats::build_design(regions, {"percpov", "log(popdens)"},
                                           stats::Response::PCT_HD);
    CHECK(built.dropped_log_domain == 1);
    CHECK(built.design.X.rows == 2);
  }
  SUBCASE("missing covariates are dropped with a count") {
    const std::vector<RegionSummary> regions = {region("a", 0, 10, std::nullopt),
                                                region("b", 25, 20, 100.0)};
    const auto built = stats::build_design(regions, {"percpov", "log(popdens)"},
                                           stats::Response::PCT_HD);
    CHECK(built.dropped_missing == 1);
  }
  SUBCASE("dispersion response drops regions without dispersion") {
    const std::vector<RegionSummary> regions = {region("a", 10, 10, 100.0, 0.5),
                                                region("b", 25, 20, 100.0)};
    const auto built =
        stats::build_design(regions, {"percpov"}, stats::Response::DISPERSION);
    CHECK(built.design.X.rows == 1);
    CHECK(built.dropped_missing == 1);
    CHECK(built.design.y == std::vector<double>{0.5});
  }
  SUBCASE("unknown covariate is a config error") {
    CHECK_THROWS_AS(stats::build_design({}, {"nonsense"}, stats::Response::PCT_HD),
                    DeprivError);
  }
}
