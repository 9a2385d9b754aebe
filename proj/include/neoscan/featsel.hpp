#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "neoscan/matrix.hpp"

namespace neoscan {

// LASSO fit in standardized feature space: prediction is
// intercept + sum_j coef[j] * (x[j] - feature_mean[j]) / feature_scale[j].
// Constant features (scale 0) always carry a zero coefficient.
struct LassoModel {
  std::vector<double> coef;
  double intercept = 0.0;
  double lambda = 0.0;
  std::vector<double> feature_mean, feature_scale;
  int sweeps = 0;
  std::vector<double> objective_curve;  // objective after each sweep
};

// Minimizes (1/2n)*sum (y_i - b0 - x_i . b)^2 + lambda*|b|_1 by cyclic
// coordinate descent with soft thresholding. Stops when the largest
// coefficient change in a sweep drops below tol, or after max_iter sweeps.
LassoModel fit_lasso(const Matrix& X, const std::vector<double>& y, double lambda,
                     double tol = 1e-6, int max_iter = 10000);

// Smallest lambda with an all-zero solution, computed with the same
// summation order as fit_lasso's first sweep so the bound is exact.
double lasso_lambda_max(const Matrix& X, const std::vector<double>& y);

double lasso_predict(const LassoModel& m, std::span<const double> x);

// Coefficients mapped back to the unstandardized feature scale.
std::vector<double> lasso_dense_coefficients(const LassoModel& m);
double lasso_dense_intercept(const LassoModel& m);

struct FeatureMask {
  std::vector<std::uint8_t> selected;  // 0/1 per feature

  int count() const {
    int n = 0;
    for (std::uint8_t s : selected) n += s;
    return n;
  }
  bool operator==(const FeatureMask&) const = default;
};

// selected[j] == (coef[j] != 0)
FeatureMask mask(const LassoModel& m);

// Sub-vector / column subset of the selected features, order preserved.
std::vector<double> apply_mask(std::span<const double> v, const FeatureMask& m);
Matrix apply_mask(const Matrix& X, const FeatureMask& m);

// 5-fold CV over a log-spaced lambda path between lambda_max and
// lambda_max/1000; returns the lambda with the lowest mean validation MSE.
double lasso_cv_lambda(const Matrix& X, const std::vector<double>& y, int folds = 5,
                       int path_points = 20, std::uint64_t seed = 0);

}  // namespace neoscan
