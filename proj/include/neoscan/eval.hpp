#pragma once

#include <cstdint>
#include <vector>

#include "neoscan/matrix.hpp"

namespace neoscan {

struct ConfusionMatrix {
  long tp = 0, tn = 0, fp = 0, fn = 0;

  long total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct Metrics {
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
};

// accuracy (tp+tn)/total, precision tp/(tp+fp), recall tp/(tp+fn),
// f1 2pr/(p+r); empty denominators give 0. Empty matrix -> invalid_argument.
Metrics metrics(const ConfusionMatrix& cm);

// Shuffled indices 0..n-1 dealt into k folds whose sizes differ by at most
// one (the first n % k folds take the extra element).
std::vector<std::vector<int>> kfold_split(int n, int k, std::uint64_t seed);

// Same balance guarantee, with each label group spread round-robin across
// folds, so every fold keeps both classes whenever each class has >= k
// members.
std::vector<std::vector<int>> kfold_split_stratified(const std::vector<int>& labels, int k,
                                                     std::uint64_t seed);

struct GridSpec {
  std::vector<double> C_values{1, 3, 5, 7, 9, 11, 13, 15};
  std::vector<double> g_values{0.5, 1, 2, 3, 4};
  int folds = 10;
};

struct GridCell {
  double C = 0.0, g = 0.0;
  double mean_recall = 0.0, mean_accuracy = 0.0;
};

struct GridResult {
  double C = 0.0, g = 0.0;  // chosen cell
  std::vector<GridCell> cells;
};

// Stratified k-fold CV of the cost-sensitive SVM over every (C, g) cell.
// Picks the cell with the best mean recall, then mean accuracy, then the
// smaller C, then the smaller g. Cells are reported sorted by (C, g).
GridResult grid_search(const Matrix& X, const std::vector<int>& y, const GridSpec& grid,
                       double cost_ratio, std::uint64_t seed = 0, double tol = 1e-3,
                       long max_passes = 10000);

}  // namespace neoscan
