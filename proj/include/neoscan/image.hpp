#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace neoscan {

// 8-bit grayscale image, row-major. The unit flowing through every
// preprocessing stage.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // size() == width * height

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  bool empty() const { return pixels.empty(); }
  std::size_t size() const { return pixels.size(); }

  bool operator==(const GrayImage& o) const = default;
};

inline GrayImage transpose(const GrayImage& img) {
  GrayImage out(img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) out.at(y, x) = img.at(x, y);
  return out;
}

// Round half-up (floor(v + 0.5)), clamp to [0, 255].
inline std::uint8_t clamp_round_u8(double v) {
  double f = v + 0.5;
  if (f <= 0.0) return 0;
  if (f >= 256.0) return 255;
  return static_cast<std::uint8_t>(static_cast<int>(f));
}

}  // namespace neoscan
