#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fixtures.hpp"
#include "neoscan/errors.hpp"
#include "neoscan/kernels.hpp"
#include "neoscan/rng.hpp"
#include "neoscan/svm.hpp"
#include "oracle_linalg.hpp"
#include "oracle_qp.hpp"

using namespace neoscan;

namespace {

std::vector<double> boxes(const std::vector<int>& y, const CostSpec& cost) {
  std::vector<double> b(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) b[i] = cost.box(y[i]);
  return b;
}

int count_false_negatives(const SvmModel& m, const Matrix& X, const std::vector<int>& y) {
  int fn = 0;
  for (int i = 0; i < X.rows; ++i)
    if (y[i] == 1 && decide(m, X.row(i)).label == -1) ++fn;
  return fn;
}

}  // namespace

TEST_CASE("rbf kernel basics") {
  const std::vector<double> x = {1.0, 2.0};
  const std::vector<double> z = {0.0, 0.0};

  CHECK(rbf(x, x, 0.7) == 1.0);
  CHECK(rbf(x, z, 0.5) == doctest::Approx(std::exp(-2.5)).epsilon(1e-12));
  CHECK(rbf(x, z, 0.5) == rbf(z, x, 0.5));
  CHECK_THROWS_AS(rbf(x, std::vector<double>{1.0}, 0.5), std::invalid_argument);
}

TEST_CASE("gram matrices are positive semidefinite") {
  Rng rng(201);
  const Matrix X = fixtures::random_matrix(14, 3, rng, -2.0, 2.0);
  Matrix K;
  kernels::rbf_gram(X, 0.9, K);
  for (double ev : oracle::symmetric_eigenvalues(K)) CHECK(ev >= -1e-8);
}

TEST_CASE("two symmetric points have a closed-form solution") {
  Matrix X(2, 1);
  X.v = {0.0, 1.0};
  const std::vector<int> y = {-1, 1};

  SmoReport report;
  const SvmModel m = train_svm(X, y, {0.5}, {10.0, 1.0}, 1e-6, 10000, &report);

  const double a_star = 1.0 / (1.0 - std::exp(-0.5));
  REQUIRE(report.alpha.size() == 2);
  CHECK(report.alpha[0] == doctest::Approx(a_star).epsilon(1e-6));
  CHECK(report.alpha[1] == doctest::Approx(a_star).epsilon(1e-6));
  CHECK(m.bias == doctest::Approx(0.0).epsilon(1e-6));

  // both points are support vectors with signed weights -a*, +a*
  REQUIRE(m.support_vectors.rows == 2);
  CHECK(m.alpha_y[0] == doctest::Approx(-a_star).epsilon(1e-6));
  CHECK(m.alpha_y[1] == doctest::Approx(a_star).epsilon(1e-6));

  // the midpoint sits on the boundary and resolves to the positive class
  const Decision mid = decide(m, std::vector<double>{0.5});
  CHECK(std::abs(mid.score) < 1e-6);
  CHECK(mid.label == 1);

  // training points end up on their margins
  CHECK(decide(m, std::vector<double>{0.0}).score == doctest::Approx(-1.0).epsilon(1e-5));
  CHECK(decide(m, std::vector<double>{1.0}).score == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("smo reaches the brute-force dual optimum on small problems") {
  for (std::uint64_t seed : {202u, 203u, 204u}) {
    const auto [X, y] = fixtures::overlap_set(4, 6, 1.5, seed);
    for (double r : {1.0, 3.0}) {
      const CostSpec cost = {2.0, r};
      const KernelSpec kernel = {0.7};

      SmoReport report;
      const SvmModel m = train_svm(X, y, kernel, cost, 1e-5, 100000, &report);

      const std::vector<double> box = boxes(y, cost);
      const std::vector<double> a_ref = oracle::solve_dual(X, y, kernel.g, box);

      const double got = svm_dual_objective(X, y, report.alpha, kernel.g);
      const double want = oracle::dual_value(X, y, kernel.g, a_ref);
      CHECK(got >= want - 1e-4);

      // the two solvers agree wherever the decision is not razor thin
      Rng rng(seed + 77);
      for (int t = 0; t < 40; ++t) {
        const std::vector<double> z = {rng.uniform(-3.0, 4.5), rng.uniform(-3.0, 3.0)};
        const double oracle_score = oracle::decision(X, y, kernel.g, a_ref, box, z);
        if (std::abs(oracle_score) < 1e-3) continue;
        CHECK(decide(m, z).label == (oracle_score >= 0.0 ? 1 : -1));
      }
    }
  }
}

TEST_CASE("solutions satisfy the KKT conditions") {
  const double tol = 1e-4;
  const auto [X, y] = fixtures::overlap_set(8, 16, 2.0, 205);
  const CostSpec cost = {3.0, 2.0};

  SmoReport report;
  const SvmModel m = train_svm(X, y, {0.8}, cost, tol, 100000, &report);
  CHECK(report.violation <= tol);
  CHECK(report.updates > 0);

  // equality constraint holds to rounding
  double sum_ay = 0.0;
  for (int i = 0; i < X.rows; ++i) sum_ay += report.alpha[i] * y[i];
  CHECK(std::abs(sum_ay) <= 1e-6 * cost.C);

  const double band = 10.0 * tol;
  for (int i = 0; i < X.rows; ++i) {
    const double box = cost.box(y[i]);
    const double yf = y[i] * decide(m, X.row(i)).score;
    CHECK(report.alpha[i] >= 0.0);
    CHECK(report.alpha[i] <= box);
    if (report.alpha[i] <= 1e-12)
      CHECK(yf >= 1.0 - band);
    else if (report.alpha[i] >= box - 1e-12)
      CHECK(yf <= 1.0 + band);
    else
      CHECK(std::abs(yf - 1.0) <= band);
  }
}

TEST_CASE("separable data is classified perfectly") {
  const auto [X, y] = fixtures::separable_set(15, 206);
  const SvmModel m = train_svm(X, y, {1.0}, {5.0, 1.0});
  for (int i = 0; i < X.rows; ++i) CHECK(decide(m, X.row(i)).label == y[i]);
}

TEST_CASE("a protective cost ratio trades false negatives down") {
  int strict = 0;
  int ties = 0;
  for (std::uint64_t seed = 300; seed < 310; ++seed) {
    const auto [X, y] = fixtures::overlap_set(12, 36, 1.6, seed);
    const SvmModel sym = train_svm(X, y, {0.5}, {1.0, 1.0});
    const SvmModel prot = train_svm(X, y, {0.5}, {1.0, 4.0});

    const int fn_sym = count_false_negatives(sym, X, y);
    const int fn_prot = count_false_negatives(prot, X, y);
    CHECK(fn_prot <= fn_sym);
    strict += fn_prot < fn_sym;
    ties += fn_prot == fn_sym;
  }
  CHECK(strict >= 8);
  (void)ties;
}

TEST_CASE("decide resolves a zero score to the positive class") {
  SvmModel m;
  m.support_vectors = Matrix(0, 2);
  m.bias = 0.0;
  CHECK(decide(m, std::vector<double>{1.0, 2.0}).label == 1);
  m.bias = -0.25;
  CHECK(decide(m, std::vector<double>{1.0, 2.0}).label == -1);
  CHECK_THROWS_AS(decide(m, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("an unreachable tolerance raises ConvergenceError") {
  const auto [X, y] = fixtures::overlap_set(10, 10, 0.5, 207);
  CHECK_THROWS_AS(train_svm(X, y, {1.0}, {50.0, 1.0}, 1e-15, 3), ConvergenceError);
}

TEST_CASE("train_svm validates its inputs") {
  const auto [X, y] = fixtures::overlap_set(4, 4, 2.0, 208);

  auto bad_labels = y;
  bad_labels[0] = 0;
  CHECK_THROWS_AS(train_svm(X, bad_labels, {1.0}, {1.0, 1.0}), std::invalid_argument);

  const std::vector<int> one_class(y.size(), 1);
  CHECK_THROWS_AS(train_svm(X, one_class, {1.0}, {1.0, 1.0}), std::invalid_argument);

  CHECK_THROWS_AS(train_svm(X, std::vector<int>{1, -1}, {1.0}, {1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(train_svm(X, y, {0.0}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(train_svm(X, y, {1.0}, {0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(train_svm(X, y, {1.0}, {1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(train_svm(X, y, {1.0}, {1.0, 1.0}, 0.0), std::invalid_argument);

  Matrix bad = X;
  bad.at(0, 0) = std::nan("");
  CHECK_THROWS_AS(train_svm(bad, y, {1.0}, {1.0, 1.0}), std::invalid_argument);
}
