#include "neoscan/edgeprep.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace neoscan {

namespace {

int reflect(int i, int n) {
  if (i < 0) return -i - 1;
  if (i >= n) return 2 * n - i - 1;
  return i;
}

// Largest possible |gx| (or |gy|): a 0/255 step under the 1-2-1 taps.
constexpr double kMaxAxisResponse = 255.0 * 4.0;
const double kMagnitudeScale = 255.0 / (kMaxAxisResponse * std::sqrt(2.0));

}  // namespace

SobelGradients sobel_gradients(const GrayImage& img) {
  if (img.width < 3 || img.height < 3)
    throw std::invalid_argument("sobel: image must be at least 3x3");

  SobelGradients g;
  g.width = img.width;
  g.height = img.height;
  g.gx.resize(img.size());
  g.gy.resize(img.size());

#pragma omp parallel for
  for (int y = 0; y < img.height; ++y) {
    const int ym = reflect(y - 1, img.height);
    const int yp = reflect(y + 1, img.height);
    for (int x = 0; x < img.width; ++x) {
      const int xm = reflect(x - 1, img.width);
      const int xp = reflect(x + 1, img.width);
      const int p00 = img.at(xm, ym), p01 = img.at(x, ym), p02 = img.at(xp, ym);
      const int p10 = img.at(xm, y), p12 = img.at(xp, y);
      const int p20 = img.at(xm, yp), p21 = img.at(x, yp), p22 = img.at(xp, yp);
      const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
      g.gx[i] = (p02 + 2 * p12 + p22) - (p00 + 2 * p10 + p20);
      g.gy[i] = (p20 + 2 * p21 + p22) - (p00 + 2 * p01 + p02);
    }
  }
  return g;
}

EdgeImage sobel(const GrayImage& img) {
  const SobelGradients g = sobel_gradients(img);

  EdgeImage e;
  e.width = img.width;
  e.height = img.height;
  e.magnitude.resize(img.size());

#pragma omp parallel for
  for (long i = 0; i < static_cast<long>(img.size()); ++i) {
    const double gx = g.gx[i], gy = g.gy[i];
    e.magnitude[i] = clamp_round_u8(std::sqrt(gx * gx + gy * gy) * kMagnitudeScale);
  }
  return e;
}

ContourMap contour(const GrayImage& img, int levels) {
  if (levels < 2 || levels > 256)
    throw std::invalid_argument("contour: levels must be in [2, 256]");

  ContourMap c;
  c.levels = levels;
  c.width = img.width;
  c.height = img.height;
  c.level_of.resize(img.size());
  for (std::size_t i = 0; i < img.size(); ++i)
    c.level_of[i] = static_cast<std::uint8_t>(img.pixels[i] * levels / 256);
  return c;
}

GrayImage to_image(const EdgeImage& e) {
  GrayImage out(e.width, e.height);
  out.pixels = e.magnitude;
  return out;
}

GrayImage render_contour(const ContourMap& c) {
  GrayImage out(c.width, c.height);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.pixels[i] = static_cast<std::uint8_t>(c.level_of[i] * 255 / (c.levels - 1));
  return out;
}

GrayImage special_preprocess(const GrayImage& img, int levels) {
  const EdgeImage e = sobel(img);
  const ContourMap c_img = contour(img, levels);
  const ContourMap c_edge = contour(to_image(e), levels);

  GrayImage out(img.width, img.height);
#pragma omp parallel for
  for (long i = 0; i < static_cast<long>(img.size()); ++i) {
    const int diff = std::max(0, img.pixels[i] - e.magnitude[i]);
    out.pixels[i] = (c_img.level_of[i] != c_edge.level_of[i])
                        ? static_cast<std::uint8_t>(std::max(diff, static_cast<int>(img.pixels[i])))
                        : static_cast<std::uint8_t>(diff);
  }
  return out;
}

}  // namespace neoscan
