#pragma once

#include <cstddef>
#include <vector>

namespace neoscan {

// Channel-major 3-D activation block: index (c, y, x).
struct Tensor {
  int c = 0, h = 0, w = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int c_, int h_, int w_)
      : c(c_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * h_ * w_, 0.0) {}

  double& at(int ch, int y, int x) {
    return v[(static_cast<std::size_t>(ch) * h + y) * w + x];
  }
  double at(int ch, int y, int x) const {
    return v[(static_cast<std::size_t>(ch) * h + y) * w + x];
  }

  std::size_t size() const { return v.size(); }
  void zero() { v.assign(v.size(), 0.0); }

  bool operator==(const Tensor& o) const = default;
};

}  // namespace neoscan
