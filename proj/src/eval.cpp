#include "neoscan/eval.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <numeric>
#include <stdexcept>

#include "neoscan/rng.hpp"
#include "neoscan/svm.hpp"

namespace neoscan {

Metrics metrics(const ConfusionMatrix& cm) {
  if (cm.tp < 0 || cm.tn < 0 || cm.fp < 0 || cm.fn < 0)
    throw std::invalid_argument("metrics: negative count");
  const long total = cm.total();
  if (total < 1) throw std::invalid_argument("metrics: empty confusion matrix");

  Metrics m;
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / total;
  m.precision = cm.tp + cm.fp > 0 ? static_cast<double>(cm.tp) / (cm.tp + cm.fp) : 0.0;
  m.recall = cm.tp + cm.fn > 0 ? static_cast<double>(cm.tp) / (cm.tp + cm.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

std::vector<std::vector<int>> kfold_split(int n, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold_split: k must be >= 2");
  if (n < k) throw std::invalid_argument("kfold_split: need n >= k");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<std::vector<int>> folds(k);
  const int base = n / k, extra = n % k;
  int pos = 0;
  for (int f = 0; f < k; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    folds[f].assign(order.begin() + pos, order.begin() + pos + size);
    pos += size;
  }
  return folds;
}

std::vector<std::vector<int>> kfold_split_stratified(const std::vector<int>& labels, int k,
                                                     std::uint64_t seed) {
  const int n = static_cast<int>(labels.size());
  if (k < 2) throw std::invalid_argument("kfold_split_stratified: k must be >= 2");
  if (n < k) throw std::invalid_argument("kfold_split_stratified: need n >= k");

  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) groups[labels[i]].push_back(i);

  Rng rng(seed);
  std::vector<std::vector<int>> folds(k);
  int fold = 0;
  for (auto& [label, idx] : groups) {
    rng.shuffle(idx);
    for (int i : idx) {
      folds[fold].push_back(i);
      fold = (fold + 1) % k;
    }
  }
  return folds;
}

GridResult grid_search(const Matrix& X, const std::vector<int>& y, const GridSpec& grid,
                       double cost_ratio, std::uint64_t seed, double tol, long max_passes) {
  if (grid.C_values.empty() || grid.g_values.empty())
    throw std::invalid_argument("grid_search: empty grid");
  for (double c : grid.C_values)
    if (!(c > 0.0)) throw std::invalid_argument("grid_search: C values must be > 0");
  for (double g : grid.g_values)
    if (!(g > 0.0)) throw std::invalid_argument("grid_search: g values must be > 0");

  std::vector<double> Cs = grid.C_values, gs = grid.g_values;
  std::sort(Cs.begin(), Cs.end());
  Cs.erase(std::unique(Cs.begin(), Cs.end()), Cs.end());
  std::sort(gs.begin(), gs.end());
  gs.erase(std::unique(gs.begin(), gs.end()), gs.end());

  const auto folds = kfold_split_stratified(y, grid.folds, seed);
  for (const auto& fold : folds) {
    bool pos = false, neg = false;
    for (int i : fold) (y[i] > 0 ? pos : neg) = true;
    if (!pos || !neg)
      throw std::invalid_argument("grid_search: a fold lost one of the classes");
  }

  // Materialize the per-fold train/validation splits once.
  struct FoldData {
    Matrix Xtr;
    std::vector<int> ytr, va;
  };
  std::vector<FoldData> fd(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<int> tr;
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != f) tr.insert(tr.end(), folds[g].begin(), folds[g].end());
    fd[f].Xtr = Matrix(static_cast<int>(tr.size()), X.cols);
    fd[f].ytr.resize(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
      std::copy(X.row(tr[i]).begin(), X.row(tr[i]).end(),
                fd[f].Xtr.row(static_cast<int>(i)).begin());
      fd[f].ytr[i] = y[tr[i]];
    }
    fd[f].va = folds[f];
  }

  const int cells_n = static_cast<int>(Cs.size() * gs.size());
  std::vector<GridCell> cells(cells_n);
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic)
  for (int cell = 0; cell < cells_n; ++cell) {
    try {
      const double C = Cs[cell / gs.size()];
      const double g = gs[cell % gs.size()];

      double recall_sum = 0.0, accuracy_sum = 0.0;
      for (const FoldData& f : fd) {
        const SvmModel model = train_svm(f.Xtr, f.ytr, KernelSpec{g}, CostSpec{C, cost_ratio},
                                         tol, max_passes);
        ConfusionMatrix cm;
        for (int i : f.va) {
          const int pred = decide(model, X.row(i)).label;
          if (y[i] > 0)
            (pred > 0 ? cm.tp : cm.fn)++;
          else
            (pred > 0 ? cm.fp : cm.tn)++;
        }
        const Metrics m = metrics(cm);
        recall_sum += m.recall;
        accuracy_sum += m.accuracy;
      }
      cells[cell] = {C, g, recall_sum / fd.size(), accuracy_sum / fd.size()};
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  int best = 0;
  for (int cell = 1; cell < cells_n; ++cell) {
    const GridCell& a = cells[cell];
    const GridCell& b = cells[best];
    if (a.mean_recall != b.mean_recall) {
      if (a.mean_recall > b.mean_recall) best = cell;
    } else if (a.mean_accuracy != b.mean_accuracy) {
      if (a.mean_accuracy > b.mean_accuracy) best = cell;
    }
    // equal on both objectives: keep the earlier cell, i.e. smaller C then g
  }

  GridResult result;
  result.C = cells[best].C;
  result.g = cells[best].g;
  result.cells = std::move(cells);
  return result;
}

}  // namespace neoscan
