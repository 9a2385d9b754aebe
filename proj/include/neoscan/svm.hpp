#pragma once

#include <span>
#include <vector>

#include "neoscan/matrix.hpp"

namespace neoscan {

struct KernelSpec {
  double g = 1.0;  // K(x,z) = exp(-g * |x - z|^2)
};

// Asymmetric slack penalties: the protected class (+1) pays C*r per unit
// slack, the other class pays C. r = 1 recovers the symmetric machine.
struct CostSpec {
  double C = 1.0;
  double r = 1.0;

  double box(int label) const { return label > 0 ? C * r : C; }
};

double rbf(std::span<const double> x, std::span<const double> z, double g);

struct SvmModel {
  KernelSpec kernel;
  CostSpec cost;
  double bias = 0.0;
  Matrix support_vectors;
  std::vector<double> alpha_y;  // signed alpha_i * y_i, one per support vector
};

// Full solver state for diagnostics and optimality checks.
struct SmoReport {
  std::vector<double> alpha;  // over all training points
  double bias = 0.0;
  long updates = 0;
  double violation = 0.0;  // final KKT gap
};

// Solves the dual: max sum(alpha) - 1/2 sum alpha_i alpha_j y_i y_j K_ij
// subject to sum alpha_i y_i = 0 and 0 <= alpha_i <= box(y_i), by SMO on
// the maximal violating pair. Stops when the gap falls below tol; throws
// ConvergenceError after max_passes pair updates without a new best gap.
SvmModel train_svm(const Matrix& X, const std::vector<int>& y, KernelSpec kernel, CostSpec cost,
                   double tol = 1e-3, long max_passes = 10000, SmoReport* report = nullptr);

struct Decision {
  double score = 0.0;
  int label = 0;  // +1 / -1; score exactly 0 resolves to +1
};

Decision decide(const SvmModel& m, std::span<const double> z);

// Dual objective of a candidate alpha on the given training set.
double svm_dual_objective(const Matrix& X, const std::vector<int>& y,
                          const std::vector<double>& alpha, double g);

}  // namespace neoscan
