#pragma once

#include <array>
#include <vector>

#include "neoscan/image.hpp"

namespace neoscan {

// Normalized 2-D Gaussian filter tap grid, (2*radius+1) on a side.
struct GaussianKernel {
  double sigma = 0.0;
  int radius = 0;
  std::vector<double> weights;  // row-major, sums to 1

  int side() const { return 2 * radius + 1; }
  double at(int dy, int dx) const {
    return weights[static_cast<std::size_t>(dy + radius) * side() + (dx + radius)];
  }
};

// Bilinear resampling, half-pixel-center mapping, rounded half-up.
GrayImage resize(const GrayImage& img, int out_w, int out_h);

// Taps sampled from exp(-(x^2+y^2)/(2*sigma^2)), radius = ceil(3*sigma),
// normalized to unit sum.
GaussianKernel gaussian_kernel(double sigma);

// Direct 2-D convolution with reflected borders.
GrayImage gaussian_blur(const GrayImage& img, const GaussianKernel& kernel);

// Contrast stretch by the cumulative histogram between the observed
// intensity extremes. Constant images pass through unchanged.
GrayImage equalize(const GrayImage& img);

// The remap table equalize() applies. Entries outside the observed
// [min, max] intensity range are identity.
std::array<std::uint8_t, 256> equalize_map(const GrayImage& img);

}  // namespace neoscan
