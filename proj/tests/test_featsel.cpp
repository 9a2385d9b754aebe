#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fixtures.hpp"
#include "neoscan/featsel.hpp"
#include "neoscan/rng.hpp"
#include "oracle_linalg.hpp"

using namespace neoscan;

namespace {

// y = 3*x0 - 2*x1 + eps; the remaining columns are pure noise.
struct Regression {
  Matrix X;
  std::vector<double> y;
};

Regression noisy_regression(int n, int p, double eps, std::uint64_t seed) {
  Rng rng(seed);
  Regression r;
  r.X = fixtures::random_matrix(n, p, rng);
  r.y.resize(n);
  for (int i = 0; i < n; ++i)
    r.y[i] = 3.0 * r.X.at(i, 0) - 2.0 * r.X.at(i, 1) + eps * rng.normal();
  return r;
}

double l1_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace

TEST_CASE("at and above lambda_max every coefficient is exactly zero") {
  const Regression r = noisy_regression(30, 5, 0.2, 101);
  const double lmax = lasso_lambda_max(r.X, r.y);
  REQUIRE(lmax > 0.0);

  for (double lambda : {lmax, lmax * 1.000001, lmax * 10}) {
    const LassoModel m = fit_lasso(r.X, r.y, lambda);
    for (double c : m.coef) CHECK(c == 0.0);
    CHECK(m.sweeps == 1);
  }

  // just below the bound the fit must activate at least one feature
  const LassoModel m = fit_lasso(r.X, r.y, lmax * 0.99);
  CHECK(mask(m).count() >= 1);
}

TEST_CASE("lambda 0 reproduces ordinary least squares") {
  const Regression r = noisy_regression(40, 4, 0.5, 102);
  const LassoModel m = fit_lasso(r.X, r.y, 0.0, 1e-13, 50000);

  const std::vector<double> beta = oracle::least_squares(r.X, r.y);
  const std::vector<double> coef = lasso_dense_coefficients(m);

  CHECK(std::abs(lasso_dense_intercept(m) - beta[0]) < 1e-8);
  for (int j = 0; j < 4; ++j) CHECK(std::abs(coef[j] - beta[j + 1]) < 1e-8);
}

TEST_CASE("single-feature fit follows the soft-threshold closed form") {
  Matrix X(4, 1);
  X.v = {1, 2, 3, 4};
  const std::vector<double> y = {2, 4, 6, 8};

  // standardized correlation is sqrt(5), and the feature variance is 1
  const double rho = std::sqrt(5.0);
  CHECK(lasso_lambda_max(X, y) == doctest::Approx(rho).epsilon(1e-12));

  for (double lambda : {0.0, 0.5, 1.5}) {
    const LassoModel m = fit_lasso(X, y, lambda);
    CHECK(m.coef[0] == doctest::Approx(rho - lambda).epsilon(1e-9));
    CHECK(m.intercept == 5.0);
    CHECK(lasso_predict(m, std::vector<double>{2.5}) == doctest::Approx(5.0));
  }

  // interpolation at lambda 0: the fit is exact
  const LassoModel exact = fit_lasso(X, y, 0.0);
  CHECK(lasso_predict(exact, std::vector<double>{1.0}) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(lasso_predict(exact, std::vector<double>{4.0}) == doctest::Approx(8.0).epsilon(1e-9));
}

TEST_CASE("the per-sweep objective never increases") {
  const Regression r = noisy_regression(50, 8, 1.0, 103);
  const double lmax = lasso_lambda_max(r.X, r.y);
  for (double frac : {0.001, 0.05, 0.3}) {
    const LassoModel m = fit_lasso(r.X, r.y, frac * lmax);
    REQUIRE(!m.objective_curve.empty());
    for (std::size_t i = 1; i < m.objective_curve.size(); ++i)
      CHECK(m.objective_curve[i] <= m.objective_curve[i - 1] + 1e-12);
  }
}

TEST_CASE("the recorded objective matches a from-scratch evaluation") {
  const Regression r = noisy_regression(25, 6, 0.8, 104);
  const LassoModel m = fit_lasso(r.X, r.y, 0.05 * lasso_lambda_max(r.X, r.y));

  // rebuild the standardized residual and objective from the model fields
  const int n = r.X.rows;
  double sq = 0.0;
  double y_mean = 0.0;
  for (double v : r.y) y_mean += v;
  y_mean /= n;
  for (int i = 0; i < n; ++i) {
    double pred = 0.0;
    for (int j = 0; j < r.X.cols; ++j) {
      if (m.feature_scale[j] == 0.0) continue;
      pred += m.coef[j] * (r.X.at(i, j) - m.feature_mean[j]) / m.feature_scale[j];
    }
    const double res = (r.y[i] - y_mean) - pred;
    sq += res * res;
  }
  const double obj = sq / (2.0 * n) + m.lambda * l1_norm(m.coef);
  CHECK(m.objective_curve.back() == doctest::Approx(obj).epsilon(1e-9));
}

TEST_CASE("heavier penalties shrink the coefficient mass") {
  const Regression r = noisy_regression(60, 6, 0.5, 105);
  const double lmax = lasso_lambda_max(r.X, r.y);

  double prev = -1.0;
  bool first = true;
  std::vector<double> norms;
  for (double frac : {0.01, 0.1, 0.3, 0.6, 0.9}) {
    const LassoModel m = fit_lasso(r.X, r.y, frac * lmax);
    const double norm = l1_norm(m.coef);
    if (!first) CHECK(norm <= prev + 1e-6);
    norms.push_back(norm);
    prev = norm;
    first = false;
  }
  CHECK(norms.front() > norms.back());  // strictly tighter at the heavy end
}

TEST_CASE("constant features always carry a zero coefficient") {
  Regression r = noisy_regression(30, 3, 0.3, 106);
  for (int i = 0; i < r.X.rows; ++i) r.X.at(i, 2) = 42.0;

  const LassoModel m = fit_lasso(r.X, r.y, 0.01);
  CHECK(m.coef[2] == 0.0);
  CHECK(lasso_dense_coefficients(m)[2] == 0.0);
  CHECK(mask(m).selected[2] == 0);
  CHECK(std::isfinite(lasso_predict(m, std::vector<double>{0.1, 0.2, 42.0})));
}

TEST_CASE("dense coefficients reproduce the standardized prediction") {
  const Regression r = noisy_regression(35, 5, 0.4, 107);
  const LassoModel m = fit_lasso(r.X, r.y, 0.02 * lasso_lambda_max(r.X, r.y));

  const std::vector<double> b = lasso_dense_coefficients(m);
  const double b0 = lasso_dense_intercept(m);
  Rng rng(108);
  for (int t = 0; t < 10; ++t) {
    std::vector<double> x(5);
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    double dense = b0;
    for (int j = 0; j < 5; ++j) dense += b[j] * x[j];
    CHECK(lasso_predict(m, x) == doctest::Approx(dense).epsilon(1e-12));
  }
}

TEST_CASE("mask selection and application") {
  LassoModel m;
  m.coef = {0.0, 1.5, 0.0, -0.25};
  const FeatureMask f = mask(m);
  CHECK(f.selected == std::vector<std::uint8_t>{0, 1, 0, 1});
  CHECK(f.count() == 2);

  const std::vector<double> v = {10, 11, 12, 13};
  CHECK(apply_mask(v, f) == std::vector<double>{11, 13});

  Matrix X(2, 4);
  X.v = {1, 2, 3, 4, 5, 6, 7, 8};
  const Matrix sub = apply_mask(X, f);
  CHECK(sub.rows == 2);
  CHECK(sub.cols == 2);
  CHECK(sub.v == std::vector<double>{2, 4, 6, 8});

  CHECK_THROWS_AS(apply_mask(std::vector<double>{1, 2}, f), std::invalid_argument);
  CHECK_THROWS_AS(apply_mask(Matrix(2, 3), f), std::invalid_argument);
}

TEST_CASE("cross-validated lambda lands inside the path and finds the signal") {
  const Regression r = noisy_regression(60, 6, 0.1, 109);
  const double lmax = lasso_lambda_max(r.X, r.y);

  const double lambda = lasso_cv_lambda(r.X, r.y);
  CHECK(lambda > 0.0);
  CHECK(lambda <= lmax);
  CHECK(lasso_cv_lambda(r.X, r.y) == lambda);  // deterministic

  const FeatureMask f = mask(fit_lasso(r.X, r.y, lambda));
  CHECK(f.selected[0] == 1);
  CHECK(f.selected[1] == 1);

  CHECK_THROWS_AS(lasso_cv_lambda(r.X, r.y, 1), std::invalid_argument);
  CHECK_THROWS_AS(lasso_cv_lambda(r.X, r.y, 5, 1), std::invalid_argument);
}

TEST_CASE("fit_lasso validates its inputs") {
  const Regression r = noisy_regression(10, 2, 0.1, 110);

  CHECK_THROWS_AS(fit_lasso(r.X, std::vector<double>(9, 0.0), 0.1), std::invalid_argument);
  CHECK_THROWS_AS(fit_lasso(r.X, r.y, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(fit_lasso(r.X, r.y, 0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(fit_lasso(r.X, r.y, 0.1, 1e-6, 0), std::invalid_argument);

  Matrix one_row(1, 2);
  CHECK_THROWS_AS(fit_lasso(one_row, std::vector<double>{1.0}, 0.1), std::invalid_argument);

  Regression bad = r;
  bad.y[0] = std::nan("");
  CHECK_THROWS_AS(fit_lasso(bad.X, bad.y, 0.1), std::invalid_argument);

  bad = r;
  bad.X.at(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(fit_lasso(bad.X, bad.y, 0.1), std::invalid_argument);
}
