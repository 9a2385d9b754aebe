#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "fixtures.hpp"
#include "neoscan/eval.hpp"

using namespace neoscan;

namespace {

std::vector<int> fold_sizes(const std::vector<std::vector<int>>& folds) {
  std::vector<int> sizes;
  for (const auto& f : folds) sizes.push_back(static_cast<int>(f.size()));
  return sizes;
}

// every index 0..n-1 appears exactly once across folds
void check_partition(const std::vector<std::vector<int>>& folds, int n) {
  std::set<int> seen;
  int count = 0;
  for (const auto& f : folds)
    for (int i : f) {
      CHECK(i >= 0);
      CHECK(i < n);
      seen.insert(i);
      ++count;
    }
  CHECK(count == n);
  CHECK(static_cast<int>(seen.size()) == n);
}

}  // namespace

TEST_CASE("published two-class confusion rows reproduce their metrics") {
  // presence stage: 106 true positives, 2 misses never happened (fn 0)
  const Metrics presence = metrics({106, 24, 2, 0});
  CHECK(presence.accuracy == doctest::Approx(0.9848).epsilon(5e-4));
  CHECK(presence.precision == doctest::Approx(0.9815).epsilon(5e-4));
  CHECK(presence.recall == doctest::Approx(1.0).epsilon(5e-4));
  CHECK(presence.f1 == doctest::Approx(0.9907).epsilon(5e-4));

  // severity stage
  const Metrics severity = metrics({51, 53, 2, 1});
  CHECK(severity.accuracy == doctest::Approx(0.9720).epsilon(5e-4));
  CHECK(severity.precision == doctest::Approx(0.9623).epsilon(5e-4));
  CHECK(severity.recall == doctest::Approx(0.9808).epsilon(5e-4));
  CHECK(severity.f1 == doctest::Approx(0.9714).epsilon(5e-4));
}

TEST_CASE("metrics handles balanced and degenerate counts") {
  const Metrics even = metrics({1, 1, 1, 1});
  CHECK(even.accuracy == 0.5);
  CHECK(even.precision == 0.5);
  CHECK(even.recall == 0.5);
  CHECK(even.f1 == 0.5);

  // no predicted positives: precision, recall and f1 collapse to 0
  const Metrics none = metrics({0, 5, 0, 3});
  CHECK(none.accuracy == doctest::Approx(5.0 / 8.0));
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);

  // all positives, all found
  const Metrics all = metrics({4, 0, 0, 0});
  CHECK(all.accuracy == 1.0);
  CHECK(all.f1 == 1.0);

  CHECK_THROWS_AS(metrics({0, 0, 0, 0}), std::invalid_argument);
}

TEST_CASE("kfold_split partitions with near-equal fold sizes") {
  SUBCASE("n divisible by k") {
    const auto folds = kfold_split(20, 5, 1);
    REQUIRE(folds.size() == 5);
    check_partition(folds, 20);
    CHECK(fold_sizes(folds) == std::vector<int>{4, 4, 4, 4, 4});
  }
  SUBCASE("remainder goes to the first folds") {
    const auto folds = kfold_split(7, 3, 2);
    REQUIRE(folds.size() == 3);
    check_partition(folds, 7);
    CHECK(fold_sizes(folds) == std::vector<int>{3, 2, 2});
  }
  SUBCASE("k equal to n gives singletons") {
    const auto folds = kfold_split(10, 10, 3);
    REQUIRE(folds.size() == 10);
    check_partition(folds, 10);
    for (const auto& f : folds) CHECK(f.size() == 1);
  }
}

TEST_CASE("kfold_split is seed-deterministic and seed-sensitive") {
  const auto a = kfold_split(30, 4, 7);
  const auto b = kfold_split(30, 4, 7);
  const auto c = kfold_split(30, 4, 8);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("kfold_split rejects invalid shapes") {
  CHECK_THROWS_AS(kfold_split(5, 6, 0), std::invalid_argument);
  CHECK_THROWS_AS(kfold_split(5, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(kfold_split(0, 2, 0), std::invalid_argument);
}

TEST_CASE("stratified folds keep both classes represented") {
  // 12 positives, 28 negatives over 4 folds: every fold gets 3 and 7
  std::vector<int> labels(40, -1);
  for (int i = 0; i < 12; ++i) labels[i * 3] = 1;

  const auto folds = kfold_split_stratified(labels, 4, 9);
  REQUIRE(folds.size() == 4);
  check_partition(folds, 40);
  for (const auto& f : folds) {
    int pos = 0, neg = 0;
    for (int i : f) (labels[i] == 1 ? pos : neg)++;
    CHECK(pos == 3);
    CHECK(neg == 7);
  }
}

TEST_CASE("stratified folds stay balanced with uneven group sizes") {
  // 5 positives over 3 folds: sizes must be {2, 2, 1} in some order
  std::vector<int> labels = {1, 1, 1, 1, 1, -1, -1, -1, -1, -1, -1, -1};
  const auto folds = kfold_split_stratified(labels, 3, 10);
  check_partition(folds, 12);
  std::vector<int> pos_counts;
  for (const auto& f : folds) {
    int pos = 0;
    for (int i : f) pos += labels[i] == 1;
    pos_counts.push_back(pos);
  }
  std::sort(pos_counts.begin(), pos_counts.end());
  CHECK(pos_counts == std::vector<int>{1, 2, 2});
}

TEST_CASE("grid_search picks the lone cell of a one-cell grid") {
  const auto [X, y] = fixtures::separable_set(12, 211);
  GridSpec grid;
  grid.C_values = {2.0};
  grid.g_values = {1.0};
  grid.folds = 3;

  const GridResult res = grid_search(X, y, grid, 1.0, 0);
  CHECK(res.C == 2.0);
  CHECK(res.g == 1.0);
  REQUIRE(res.cells.size() == 1);
  CHECK(res.cells[0].mean_recall == doctest::Approx(1.0));
  CHECK(res.cells[0].mean_accuracy == doctest::Approx(1.0));
}

TEST_CASE("grid_search results do not depend on the value order") {
  const auto [X, y] = fixtures::overlap_set(10, 20, 1.8, 212);
  GridSpec a;
  a.C_values = {1.0, 5.0, 9.0};
  a.g_values = {0.5, 2.0};
  a.folds = 4;

  GridSpec b = a;
  std::reverse(b.C_values.begin(), b.C_values.end());
  std::reverse(b.g_values.begin(), b.g_values.end());
  b.C_values.push_back(5.0);  // duplicates collapse

  const GridResult ra = grid_search(X, y, a, 2.0, 5);
  const GridResult rb = grid_search(X, y, b, 2.0, 5);

  CHECK(ra.C == rb.C);
  CHECK(ra.g == rb.g);
  REQUIRE(ra.cells.size() == rb.cells.size());
  for (std::size_t i = 0; i < ra.cells.size(); ++i) {
    CHECK(ra.cells[i].C == rb.cells[i].C);
    CHECK(ra.cells[i].g == rb.cells[i].g);
    CHECK(ra.cells[i].mean_recall == rb.cells[i].mean_recall);
    CHECK(ra.cells[i].mean_accuracy == rb.cells[i].mean_accuracy);
  }

  // cells come back sorted by (C, g)
  for (std::size_t i = 1; i < ra.cells.size(); ++i) {
    const bool ordered = ra.cells[i - 1].C < ra.cells[i].C ||
                         (ra.cells[i - 1].C == ra.cells[i].C &&
                          ra.cells[i - 1].g < ra.cells[i].g);
    CHECK(ordered);
  }
}

TEST_CASE("grid_search applies the full tie-break chain") {
  // A perfectly separable set: every cell scores recall 1 and accuracy 1,
  // so the chain must fall through to the smallest C, then the smallest g.
  const auto [X, y] = fixtures::separable_set(12, 213);
  GridSpec grid;
  grid.C_values = {8.0, 2.0};
  grid.g_values = {1.5, 0.5};
  grid.folds = 3;

  const GridResult res = grid_search(X, y, grid, 1.0, 1);
  bool all_perfect = true;
  for (const GridCell& c : res.cells)
    all_perfect = all_perfect && c.mean_recall == doctest::Approx(1.0).epsilon(1e-12) &&
                  c.mean_accuracy == doctest::Approx(1.0).epsilon(1e-12);
  REQUIRE(all_perfect);
  CHECK(res.C == 2.0);
  CHECK(res.g == 0.5);
}

TEST_CASE("grid_search surfaces fold starvation as invalid_argument") {
  // 3 positives cannot stratify into 4 folds without an empty class
  auto [X, y] = fixtures::overlap_set(3, 21, 2.0, 214);
  GridSpec grid;
  grid.C_values = {1.0};
  grid.g_values = {1.0};
  grid.folds = 4;
  CHECK_THROWS_AS(grid_search(X, y, grid, 1.0, 0), std::invalid_argument);
}
