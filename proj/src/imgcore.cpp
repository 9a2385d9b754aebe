#include "neoscan/imgcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace neoscan {

namespace {

// Reflect an out-of-range coordinate back into [0, n) with the edge sample
// repeated (... 2 1 0 | 0 1 2 ...). Loops so it also covers kernels wider
// than the image.
int reflect(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return i;
}

}  // namespace

GrayImage resize(const GrayImage& img, int out_w, int out_h) {
  if (img.empty()) throw std::invalid_argument("resize: empty image");
  if (out_w < 1 || out_h < 1) throw std::invalid_argument("resize: output dimensions must be >= 1");

  GrayImage out(out_w, out_h);
  const double sx = static_cast<double>(img.width) / out_w;
  const double sy = static_cast<double>(img.height) / out_h;

#pragma omp parallel for
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(img.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(img.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      const double top = (1.0 - wx) * img.at(x0, y0) + wx * img.at(x1, y0);
      const double bot = (1.0 - wx) * img.at(x0, y1) + wx * img.at(x1, y1);
      out.at(x, y) = clamp_round_u8((1.0 - wy) * top + wy * bot);
    }
  }
  return out;
}

GaussianKernel gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be > 0");

  GaussianKernel k;
  k.sigma = sigma;
  k.radius = static_cast<int>(std::ceil(3.0 * sigma));
  const int side = k.side();
  k.weights.resize(static_cast<std::size_t>(side) * side);

  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  long double sum = 0.0L;
  for (int dy = -k.radius; dy <= k.radius; ++dy)
    for (int dx = -k.radius; dx <= k.radius; ++dx) {
      const double w = std::exp(-(dx * dx + dy * dy) * inv2s2);
      k.weights[static_cast<std::size_t>(dy + k.radius) * side + (dx + k.radius)] = w;
      sum += w;
    }
  const double inv = static_cast<double>(1.0L / sum);
  for (double& w : k.weights) w *= inv;
  return k;
}

GrayImage gaussian_blur(const GrayImage& img, const GaussianKernel& kernel) {
  if (img.empty()) throw std::invalid_argument("gaussian_blur: empty image");

  GrayImage out(img.width, img.height);
  const int r = kernel.radius;

#pragma omp parallel for
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        const int sy = reflect(y + dy, img.height);
        for (int dx = -r; dx <= r; ++dx) {
          const int sx = reflect(x + dx, img.width);
          acc += kernel.at(dy, dx) * img.at(sx, sy);
        }
      }
      out.at(x, y) = clamp_round_u8(acc);
    }
  }
  return out;
}

std::array<std::uint8_t, 256> equalize_map(const GrayImage& img) {
  std::array<std::uint8_t, 256> map{};
  for (int g = 0; g < 256; ++g) map[g] = static_cast<std::uint8_t>(g);
  if (img.empty()) return map;

  std::array<long, 256> hist{};
  for (std::uint8_t p : img.pixels) ++hist[p];

  int g_min = 0, g_max = 255;
  while (hist[g_min] == 0) ++g_min;
  while (hist[g_max] == 0) --g_max;
  if (g_min == g_max) return map;  // degenerate histogram, keep identity

  const double span = g_max - g_min;
  long total = 0;
  for (int g = g_min; g <= g_max; ++g) total += hist[g];

  long cum = 0;
  for (int g = g_min; g <= g_max; ++g) {
    cum += hist[g];
    map[g] = clamp_round_u8(g_min + span * (static_cast<double>(cum) / total));
  }
  return map;
}

GrayImage equalize(const GrayImage& img) {
  if (img.empty()) throw std::invalid_argument("equalize: empty image");
  const auto map = equalize_map(img);
  GrayImage out(img.width, img.height);
  std::transform(img.pixels.begin(), img.pixels.end(), out.pixels.begin(),
                 [&map](std::uint8_t p) { return map[p]; });
  return out;
}

}  // namespace neoscan
