#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace neoscan {

// Dense row-major matrix of doubles. Rows are samples, columns features.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }

  std::span<const double> row(int r) const {
    return {v.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }
  std::span<double> row(int r) {
    return {v.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }

  bool operator==(const Matrix& o) const = default;
};

}  // namespace neoscan
