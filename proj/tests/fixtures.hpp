#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "neoscan/convnet.hpp"
#include "neoscan/image.hpp"
#include "neoscan/matrix.hpp"
#include "neoscan/pipeline.hpp"
#include "neoscan/rng.hpp"

// Synthetic data used across the test binaries. Every generator is a pure
// function of its seed.
namespace fixtures {

using neoscan::ClassLabel;
using neoscan::GrayImage;
using neoscan::LabeledImage;
using neoscan::Matrix;
using neoscan::Rng;
using neoscan::Sample;

inline GrayImage noisy_flat(int size, int base, int noise, Rng& rng) {
  GrayImage img(size, size);
  for (auto& p : img.pixels) {
    const int v = base + static_cast<int>(rng.below(2 * noise + 1)) - noise;
    p = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
  }
  return img;
}

inline void fill_disc(GrayImage& img, double cx, double cy, double r, int delta) {
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy <= r * r) {
        const int v = img.at(x, y) + delta;
        img.at(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
      }
    }
}

// Adds a cell-pattern texture inside the disc: alternating blocks.
inline void fill_textured_disc(GrayImage& img, double cx, double cy, double r, int lo, int hi,
                               int cell) {
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy <= r * r) {
        const bool on = ((x / cell) + (y / cell)) % 2 == 0;
        const int v = img.at(x, y) + (on ? hi : lo);
        img.at(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
      }
    }
}

// Three visually distinct classes over a brightness-jittered background:
// normal is flat, benign carries one smooth disc, malignant a textured
// disc of the same footprint. The global jitter makes raw intensity an
// unreliable cue, while the edge structure stays class-specific.
inline GrayImage class_image(ClassLabel label, int size, Rng& rng) {
  const int jitter = static_cast<int>(rng.below(71)) - 35;  // [-35, 35]
  GrayImage img = noisy_flat(size, 80 + jitter, 8, rng);

  const double c = size / 2.0 + static_cast<int>(rng.below(5)) - 2;
  const double r = size * 0.28 + static_cast<int>(rng.below(3)) - 1;
  switch (label) {
    case ClassLabel::Normal:
      break;
    case ClassLabel::Benign:
      fill_disc(img, c, c, r, 70);
      break;
    case ClassLabel::Malignant:
      fill_textured_disc(img, c, c, r, 25, 95, 3);
      break;
  }
  return img;
}

inline std::vector<Sample> blob_dataset(int per_class, int size, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Sample> samples;
  int serial = 0;
  for (ClassLabel label :
       {ClassLabel::Normal, ClassLabel::Benign, ClassLabel::Malignant}) {
    for (int i = 0; i < per_class; ++i) {
      Sample s;
      s.image = class_image(label, size, rng);
      s.label = label;
      s.id = neoscan::to_string(label) + "/" + std::to_string(serial++) + ".pgm";
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

// Variant tuned for preprocessing comparisons: the class signal is carried
// by smooth shapes (solid disc vs cratered disc) that survive the
// edge-difference step, while heavy speckle noise — which that step
// suppresses — is the main nuisance.
inline GrayImage ablation_image(ClassLabel label, int size, Rng& rng) {
  GrayImage img = noisy_flat(size, 70, 45, rng);
  const double c = size / 2.0 + static_cast<int>(rng.below(5)) - 2;
  const double r = size * 0.30 + static_cast<int>(rng.below(3)) - 1;
  switch (label) {
    case ClassLabel::Normal:
      break;
    case ClassLabel::Benign:
      fill_disc(img, c, c, r, 90);
      break;
    case ClassLabel::Malignant:
      fill_disc(img, c, c, r, 90);
      fill_disc(img, c, c, r * 0.45, -70);
      break;
  }
  return img;
}

inline std::vector<Sample> ablation_dataset(int per_class, int size, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Sample> samples;
  int serial = 0;
  for (ClassLabel label :
       {ClassLabel::Normal, ClassLabel::Benign, ClassLabel::Malignant}) {
    for (int i = 0; i < per_class; ++i) {
      Sample s;
      s.image = ablation_image(label, size, rng);
      s.label = label;
      s.id = neoscan::to_string(label) + "/" + std::to_string(serial++) + ".pgm";
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

// Linearly separable two-class image set for quick extractor training:
// dark-field vs bright-disc images at the exact network input size.
inline std::vector<LabeledImage> two_class_blobs(int per_class, int size, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledImage> data;
  for (int i = 0; i < per_class; ++i) {
    LabeledImage a;
    a.image = noisy_flat(size, 40, 6, rng);
    a.label = 0;
    data.push_back(std::move(a));

    LabeledImage b;
    b.image = noisy_flat(size, 40, 6, rng);
    fill_disc(b.image, size / 2.0, size / 2.0, size * 0.3, 120);
    b.label = 1;
    data.push_back(std::move(b));
  }
  return data;
}

inline void gaussian_cloud(Matrix& X, std::vector<int>& y, int n, double mx, double my,
                           double sd, int label, Rng& rng) {
  const int base = X.rows;
  Matrix next(base + n, 2);
  std::copy(X.v.begin(), X.v.end(), next.v.begin());
  for (int i = 0; i < n; ++i) {
    next.at(base + i, 0) = mx + sd * rng.normal();
    next.at(base + i, 1) = my + sd * rng.normal();
    y.push_back(label);
  }
  X = std::move(next);
}

// Imbalanced overlapping two-class cloud: minority protected class (+1) at
// distance `sep` from the majority. Labels come out interleaved by block.
inline std::pair<Matrix, std::vector<int>> overlap_set(int n_pos, int n_neg, double sep,
                                                       std::uint64_t seed) {
  Rng rng(seed);
  Matrix X(0, 2);
  std::vector<int> y;
  gaussian_cloud(X, y, n_neg, 0.0, 0.0, 1.0, -1, rng);
  gaussian_cloud(X, y, n_pos, sep, 0.0, 1.0, 1, rng);
  return {std::move(X), std::move(y)};
}

// Well-separated clouds for tests that need a clean decision boundary.
inline std::pair<Matrix, std::vector<int>> separable_set(int per_class, std::uint64_t seed) {
  Rng rng(seed);
  Matrix X(0, 2);
  std::vector<int> y;
  gaussian_cloud(X, y, per_class, 0.0, 0.0, 0.4, -1, rng);
  gaussian_cloud(X, y, per_class, 4.0, 0.0, 0.4, 1, rng);
  return {std::move(X), std::move(y)};
}

inline Matrix random_matrix(int rows, int cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix X(rows, cols);
  for (double& v : X.v) v = rng.uniform(lo, hi);
  return X;
}

}  // namespace fixtures
