#pragma once

#include <span>
#include <vector>

#include "neoscan/matrix.hpp"

// Brute-force projected-gradient solver for the SVM dual, kept independent
// of the library solver so it can serve as a correctness oracle on small
// fixtures. Much too slow for real problems.
namespace oracle {

// Maximizes sum(a) - 1/2 sum a_i a_j y_i y_j K_ij over
// {0 <= a_i <= box_i, sum a_i y_i = 0} for the RBF kernel with parameter g.
std::vector<double> solve_dual(const neoscan::Matrix& X, const std::vector<int>& y, double g,
                               const std::vector<double>& box, int iters = 200000);

double dual_value(const neoscan::Matrix& X, const std::vector<int>& y, double g,
                  const std::vector<double>& alpha);

// Decision score sum_i a_i y_i K(x_i, z) + b with b recovered from the free
// multipliers (or the KKT interval midpoint when none are free).
double decision(const neoscan::Matrix& X, const std::vector<int>& y, double g,
                const std::vector<double>& alpha, const std::vector<double>& box,
                std::span<const double> z);

}  // namespace oracle
