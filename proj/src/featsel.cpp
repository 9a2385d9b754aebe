#include "neoscan/featsel.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "neoscan/rng.hpp"

namespace neoscan {

namespace {

struct Standardized {
  Matrix X;                 // column-standardized copy
  std::vector<double> yc;   // centered targets
  std::vector<double> mean, scale;
  double y_mean = 0.0;
};

Standardized standardize(const Matrix& X, const std::vector<double>& y) {
  if (X.rows != static_cast<int>(y.size()) || X.rows < 2)
    throw std::invalid_argument("fit_lasso: need X rows == y length >= 2");
  for (double v : X.v)
    if (!std::isfinite(v)) throw std::invalid_argument("fit_lasso: non-finite feature");
  for (double v : y)
    if (!std::isfinite(v)) throw std::invalid_argument("fit_lasso: non-finite target");

  Standardized s;
  s.X = X;
  s.mean.resize(X.cols);
  s.scale.resize(X.cols);

  const double inv_n = 1.0 / X.rows;
  for (int j = 0; j < X.cols; ++j) {
    double m = 0.0;
    for (int i = 0; i < X.rows; ++i) m += X.at(i, j);
    m *= inv_n;
    double var = 0.0;
    for (int i = 0; i < X.rows; ++i) {
      const double d = X.at(i, j) - m;
      var += d * d;
    }
    const double sd = std::sqrt(var * inv_n);
    s.mean[j] = m;
    s.scale[j] = sd;
    if (sd > 0.0)
      for (int i = 0; i < X.rows; ++i) s.X.at(i, j) = (X.at(i, j) - m) / sd;
    else
      for (int i = 0; i < X.rows; ++i) s.X.at(i, j) = 0.0;
  }

  s.y_mean = std::accumulate(y.begin(), y.end(), 0.0) * inv_n;
  s.yc.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) s.yc[i] = y[i] - s.y_mean;
  return s;
}

// (1/n) * column_j . r  — the shared inner product that also defines
// lambda_max, kept in one place so the two agree bit for bit.
double column_rho(const Matrix& X, const std::vector<double>& r, int j) {
  double acc = 0.0;
  for (int i = 0; i < X.rows; ++i) acc += X.at(i, j) * r[i];
  return acc / X.rows;
}

double soft_threshold(double v, double lambda) {
  if (v > lambda) return v - lambda;
  if (v < -lambda) return v + lambda;
  return 0.0;
}

double objective(const std::vector<double>& r, const std::vector<double>& beta, double lambda,
                 int n) {
  double sq = 0.0;
  for (double v : r) sq += v * v;
  double l1 = 0.0;
  for (double b : beta) l1 += std::abs(b);
  return sq / (2.0 * n) + lambda * l1;
}

}  // namespace

double lasso_lambda_max(const Matrix& X, const std::vector<double>& y) {
  const Standardized s = standardize(X, y);
  double lmax = 0.0;
  for (int j = 0; j < X.cols; ++j) {
    if (s.scale[j] == 0.0) continue;
    lmax = std::max(lmax, std::abs(column_rho(s.X, s.yc, j)));
  }
  return lmax;
}

LassoModel fit_lasso(const Matrix& X, const std::vector<double>& y, double lambda, double tol,
                     int max_iter) {
  if (lambda < 0.0) throw std::invalid_argument("fit_lasso: lambda must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("fit_lasso: tol must be > 0");
  if (max_iter < 1) throw std::invalid_argument("fit_lasso: max_iter must be >= 1");

  Standardized s = standardize(X, y);
  const int n = X.rows, p = X.cols;

  // z_j = (1/n) * ||column_j||^2; 1 up to rounding after standardization.
  std::vector<double> z(p, 0.0);
  for (int j = 0; j < p; ++j) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += s.X.at(i, j) * s.X.at(i, j);
    z[j] = acc / n;
  }

  LassoModel m;
  m.lambda = lambda;
  m.intercept = s.y_mean;
  m.feature_mean = s.mean;
  m.feature_scale = s.scale;
  m.coef.assign(p, 0.0);

  std::vector<double> r = s.yc;  // residual y~ - X~ beta
  for (int sweep = 0; sweep < max_iter; ++sweep) {
    double max_delta = 0.0;
    for (int j = 0; j < p; ++j) {
      if (s.scale[j] == 0.0) continue;
      const double rho = column_rho(s.X, r, j) + z[j] * m.coef[j];
      const double next = soft_threshold(rho, lambda) / z[j];
      const double delta = next - m.coef[j];
      if (delta != 0.0) {
        for (int i = 0; i < n; ++i) r[i] -= s.X.at(i, j) * delta;
        m.coef[j] = next;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    ++m.sweeps;
    m.objective_curve.push_back(objective(r, m.coef, lambda, n));
    assert(m.objective_curve.size() < 2 ||
           m.objective_curve.back() <=
               m.objective_curve[m.objective_curve.size() - 2] + 1e-12);
    if (max_delta < tol) break;
  }
  return m;
}

double lasso_predict(const LassoModel& m, std::span<const double> x) {
  if (x.size() != m.coef.size()) throw std::invalid_argument("lasso_predict: length mismatch");
  double acc = m.intercept;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (m.coef[j] == 0.0 || m.feature_scale[j] == 0.0) continue;
    acc += m.coef[j] * (x[j] - m.feature_mean[j]) / m.feature_scale[j];
  }
  return acc;
}

std::vector<double> lasso_dense_coefficients(const LassoModel& m) {
  std::vector<double> b(m.coef.size(), 0.0);
  for (std::size_t j = 0; j < b.size(); ++j)
    if (m.feature_scale[j] > 0.0) b[j] = m.coef[j] / m.feature_scale[j];
  return b;
}

double lasso_dense_intercept(const LassoModel& m) {
  double b0 = m.intercept;
  const auto b = lasso_dense_coefficients(m);
  for (std::size_t j = 0; j < b.size(); ++j) b0 -= b[j] * m.feature_mean[j];
  return b0;
}

FeatureMask mask(const LassoModel& m) {
  FeatureMask f;
  f.selected.resize(m.coef.size());
  for (std::size_t j = 0; j < m.coef.size(); ++j) f.selected[j] = m.coef[j] != 0.0 ? 1 : 0;
  return f;
}

std::vector<double> apply_mask(std::span<const double> v, const FeatureMask& m) {
  if (v.size() != m.selected.size()) throw std::invalid_argument("apply_mask: length mismatch");
  std::vector<double> out;
  out.reserve(m.count());
  for (std::size_t j = 0; j < v.size(); ++j)
    if (m.selected[j]) out.push_back(v[j]);
  return out;
}

Matrix apply_mask(const Matrix& X, const FeatureMask& m) {
  if (X.cols != static_cast<int>(m.selected.size()))
    throw std::invalid_argument("apply_mask: column count mismatch");
  Matrix out(X.rows, m.count());
  for (int i = 0; i < X.rows; ++i) {
    int c = 0;
    for (int j = 0; j < X.cols; ++j)
      if (m.selected[j]) out.at(i, c++) = X.at(i, j);
  }
  return out;
}

double lasso_cv_lambda(const Matrix& X, const std::vector<double>& y, int folds, int path_points,
                       std::uint64_t seed) {
  if (folds < 2 || folds > X.rows) throw std::invalid_argument("lasso_cv_lambda: bad fold count");
  if (path_points < 2) throw std::invalid_argument("lasso_cv_lambda: need >= 2 path points");

  const double lmax = lasso_lambda_max(X, y);
  if (lmax == 0.0) return 0.0;

  std::vector<int> order(X.rows);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  double best_lambda = lmax, best_mse = std::numeric_limits<double>::infinity();
  for (int t = 0; t < path_points; ++t) {
    const double frac = static_cast<double>(t) / (path_points - 1);
    const double lambda = lmax * std::pow(1e-3, frac);

    double se = 0.0;
    long count = 0;
    for (int f = 0; f < folds; ++f) {
      std::vector<int> tr, va;
      for (int i = 0; i < X.rows; ++i)
        (i % folds == f ? va : tr).push_back(order[i]);

      Matrix Xtr(static_cast<int>(tr.size()), X.cols);
      std::vector<double> ytr(tr.size());
      for (std::size_t i = 0; i < tr.size(); ++i) {
        std::copy(X.row(tr[i]).begin(), X.row(tr[i]).end(), Xtr.row(static_cast<int>(i)).begin());
        ytr[i] = y[tr[i]];
      }
      const LassoModel m = fit_lasso(Xtr, ytr, lambda);
      for (int i : va) {
        const double d = lasso_predict(m, X.row(i)) - y[i];
        se += d * d;
        ++count;
      }
    }
    const double mse = se / count;
    if (mse < best_mse) {
      best_mse = mse;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

}  // namespace neoscan
