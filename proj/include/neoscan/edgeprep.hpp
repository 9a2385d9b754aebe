#pragma once

#include <vector>

#include "neoscan/image.hpp"

namespace neoscan {

// Raw Sobel responses, before magnitude scaling.
struct SobelGradients {
  int width = 0;
  int height = 0;
  std::vector<int> gx, gy;

  int gx_at(int x, int y) const { return gx[static_cast<std::size_t>(y) * width + x]; }
  int gy_at(int x, int y) const { return gy[static_cast<std::size_t>(y) * width + x]; }
};

// Edge magnitude scaled so the maximal possible Sobel response hits 255.
struct EdgeImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> magnitude;
};

// Per-pixel intensity quantization into `levels` equal-width bands.
struct ContourMap {
  int levels = 0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> level_of;
};

// 3x3 Sobel pair with reflected borders. Requires at least a 3x3 image.
SobelGradients sobel_gradients(const GrayImage& img);
EdgeImage sobel(const GrayImage& img);

ContourMap contour(const GrayImage& img, int levels);

GrayImage to_image(const EdgeImage& e);

// Levels stretched to [0, 255] for dumping a contour map as an image.
GrayImage render_contour(const ContourMap& c);

// Edge-difference filter: subtracts the Sobel magnitude from the image,
// restoring the original intensity wherever the image contour and the edge
// contour disagree.
GrayImage special_preprocess(const GrayImage& img, int levels);

}  // namespace neoscan
