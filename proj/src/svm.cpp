#include "neoscan/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "neoscan/errors.hpp"
#include "neoscan/kernels.hpp"

namespace neoscan {

double rbf(std::span<const double> x, std::span<const double> z, double g) {
  if (x.size() != z.size()) throw std::invalid_argument("rbf: length mismatch");
  double d2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - z[k];
    d2 += d * d;
  }
  return std::exp(-g * d2);
}

namespace {

constexpr int kGramCacheLimit = 4000;

// Kernel rows, either from a precomputed Gram matrix (n small enough) or
// recomputed on demand.
class GramSource {
 public:
  GramSource(const Matrix& X, double g) : X_(X), g_(g) {
    if (X.rows <= kGramCacheLimit) {
      full_.emplace();
      kernels::rbf_gram(X, g, *full_);
    } else {
      scratch_.resize(X.rows);
    }
  }

  std::span<const double> row(int i) {
    if (full_) return full_->row(i);
    const auto xi = X_.row(i);
    for (int j = 0; j < X_.rows; ++j) scratch_[j] = rbf(xi, X_.row(j), g_);
    return scratch_;
  }

 private:
  const Matrix& X_;
  double g_;
  std::optional<Matrix> full_;
  std::vector<double> scratch_;
};

}  // namespace

SvmModel train_svm(const Matrix& X, const std::vector<int>& y, KernelSpec kernel, CostSpec cost,
                   double tol, long max_passes, SmoReport* report) {
  const int n = X.rows;
  if (n != static_cast<int>(y.size()) || n < 2)
    throw std::invalid_argument("train_svm: need X rows == y length >= 2");
  if (!(kernel.g > 0.0)) throw std::invalid_argument("train_svm: kernel g must be > 0");
  if (!(cost.C > 0.0) || cost.r < 1.0)
    throw std::invalid_argument("train_svm: need C > 0 and r >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("train_svm: tol must be > 0");

  bool pos = false, neg = false;
  for (int label : y) {
    if (label == 1)
      pos = true;
    else if (label == -1)
      neg = true;
    else
      throw std::invalid_argument("train_svm: labels must be +1 or -1");
  }
  if (!pos || !neg) throw std::invalid_argument("train_svm: both classes must be present");
  for (double v : X.v)
    if (!std::isfinite(v)) throw std::invalid_argument("train_svm: non-finite feature");

  GramSource gram(X, kernel.g);

  std::vector<double> alpha(n, 0.0);
  std::vector<double> u(n, 0.0);  // u_t = sum_j alpha_j y_j K_tj (no bias)
  std::vector<double> box(n);
  for (int i = 0; i < n; ++i) box[i] = cost.box(y[i]);

  long updates = 0;
  long since_best = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  double gap = 0.0;

  while (true) {
    // Maximal violating pair over grad_t = y_t - u_t.
    int i = -1, j = -1;
    double m = -std::numeric_limits<double>::infinity();
    double M = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; ++t) {
      const double grad = y[t] - u[t];
      const bool in_up = y[t] > 0 ? alpha[t] < box[t] : alpha[t] > 0.0;
      const bool in_low = y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < box[t];
      if (in_up && grad > m) {
        m = grad;
        i = t;
      }
      if (in_low && grad < M) {
        M = grad;
        j = t;
      }
    }
    gap = m - M;
    if (i < 0 || j < 0 || gap <= tol) break;

    if (gap < best_gap) {
      best_gap = gap;
      since_best = 0;
    } else if (++since_best >= max_passes) {
      throw ConvergenceError("train_svm: no progress after " + std::to_string(max_passes) +
                             " pair updates (gap " + std::to_string(gap) + ")");
    }

    const auto Ki = gram.row(i);
    // gram.row may reuse a scratch buffer; copy before fetching row j.
    std::vector<double> Ki_copy;
    std::span<const double> Ki_view = Ki;
    if (n > kGramCacheLimit) {
      Ki_copy.assign(Ki.begin(), Ki.end());
      Ki_view = Ki_copy;
    }
    const auto Kj = gram.row(j);

    const double s = y[i] * y[j];
    double L, H;
    if (y[i] != y[j]) {
      L = std::max(0.0, alpha[j] - alpha[i]);
      H = std::min(box[j], box[i] + alpha[j] - alpha[i]);
    } else {
      L = std::max(0.0, alpha[i] + alpha[j] - box[i]);
      H = std::min(box[j], alpha[i] + alpha[j]);
    }

    const double Ei = u[i] - y[i];
    const double Ej = u[j] - y[j];
    double eta = Ki_view[i] + Kj[j] - 2.0 * Ki_view[j];
    if (eta <= 0.0) eta = 1e-12;  // push to an endpoint of [L, H]

    double aj = alpha[j] + y[j] * (Ei - Ej) / eta;
    aj = std::clamp(aj, L, H);
    double ai = alpha[i] + s * (alpha[j] - aj);

    // Cancellation can strand a multiplier a hair inside its box; the point
    // then stays selectable but offers no room, and the pair livelocks.
    // Land on the bound exactly instead.
    const double snap_i = 1e-12 * (1.0 + box[i]);
    const double snap_j = 1e-12 * (1.0 + box[j]);
    if (ai < snap_i)
      ai = 0.0;
    else if (ai > box[i] - snap_i)
      ai = box[i];
    if (aj < snap_j)
      aj = 0.0;
    else if (aj > box[j] - snap_j)
      aj = box[j];

    const double di = (ai - alpha[i]) * y[i];
    const double dj = (aj - alpha[j]) * y[j];
    alpha[i] = ai;
    alpha[j] = aj;
    for (int t = 0; t < n; ++t) u[t] += di * Ki_view[t] + dj * Kj[t];
    ++updates;
  }

  // Bias from free support vectors; fall back to the gap midpoint.
  double b = 0.0;
  int free_count = 0;
  for (int t = 0; t < n; ++t) {
    if (alpha[t] > 0.0 && alpha[t] < box[t]) {
      b += y[t] - u[t];
      ++free_count;
    }
  }
  if (free_count > 0) {
    b /= free_count;
  } else {
    double m = -std::numeric_limits<double>::infinity();
    double M = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; ++t) {
      const double grad = y[t] - u[t];
      if (y[t] > 0 ? alpha[t] < box[t] : alpha[t] > 0.0) m = std::max(m, grad);
      if (y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < box[t]) M = std::min(M, grad);
    }
    b = (m + M) / 2.0;
  }

  SvmModel model;
  model.kernel = kernel;
  model.cost = cost;
  model.bias = b;

  std::vector<int> sv;
  for (int t = 0; t < n; ++t)
    if (alpha[t] > 1e-12) sv.push_back(t);
  model.support_vectors = Matrix(static_cast<int>(sv.size()), X.cols);
  model.alpha_y.resize(sv.size());
  for (std::size_t k = 0; k < sv.size(); ++k) {
    std::copy(X.row(sv[k]).begin(), X.row(sv[k]).end(),
              model.support_vectors.row(static_cast<int>(k)).begin());
    model.alpha_y[k] = alpha[sv[k]] * y[sv[k]];
  }

  if (report) {
    report->alpha = std::move(alpha);
    report->bias = b;
    report->updates = updates;
    report->violation = gap;
  }
  return model;
}

Decision decide(const SvmModel& m, std::span<const double> z) {
  if (static_cast<int>(z.size()) != m.support_vectors.cols)
    throw std::invalid_argument("decide: feature length mismatch");
  double score = m.bias;
  for (int k = 0; k < m.support_vectors.rows; ++k)
    score += m.alpha_y[k] * rbf(m.support_vectors.row(k), z, m.kernel.g);
  return {score, score >= 0.0 ? 1 : -1};
}

double svm_dual_objective(const Matrix& X, const std::vector<int>& y,
                          const std::vector<double>& alpha, double g) {
  if (X.rows != static_cast<int>(y.size()) || X.rows != static_cast<int>(alpha.size()))
    throw std::invalid_argument("svm_dual_objective: size mismatch");
  Matrix K;
  kernels::rbf_gram(X, g, K);
  double obj = 0.0;
  for (int i = 0; i < X.rows; ++i) {
    obj += alpha[i];
    double ui = 0.0;
    for (int j = 0; j < X.rows; ++j) ui += alpha[j] * y[j] * K.at(i, j);
    obj -= 0.5 * alpha[i] * y[i] * ui;
  }
  return obj;
}

}  // namespace neoscan
