#include "reference.hpp"

#include <cmath>
#include <stdexcept>

namespace neoscan::ref {

namespace {

int reflect(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return i;
}

}  // namespace

GrayImage gaussian_blur(const GrayImage& img, const GaussianKernel& kernel) {
  if (img.empty()) throw std::invalid_argument("gaussian_blur: empty image");
  GrayImage out(img.width, img.height);
  const int r = kernel.radius;
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

SobelGradients sobel_gradients(const GrayImage& img) {
  if (img.width < 3 || img.height < 3)
    throw std::invalid_argument("sobel: image must be at least 3x3");
  SobelGradients g;
  g.width = img.width;
  g.height = img.height;
  g.gx.resize(img.size());
  g.gy.resize(img.size());

  static const int kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  static const int ky[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};

  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      int gx = 0, gy = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int p = img.at(reflect(x + dx, img.width), reflect(y + dy, img.height));
          gx += kx[dy + 1][dx + 1] * p;
          gy += ky[dy + 1][dx + 1] * p;
        }
      }
      const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
      g.gx[i] = gx;
      g.gy[i] = gy;
    }
  }
  return g;
}

void conv3x3_relu(const Tensor& in, std::span<const double> w, std::span<const double> b,
                  int out_c, Tensor& out) {
  const int oh = in.h - 2, ow = in.w - 2;
  out = Tensor(out_c, oh, ow);
  for (int oc = 0; oc < out_c; ++oc) {
    const double* wc = w.data() + static_cast<std::size_t>(oc) * in.c * 9;
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double acc = b[oc];
        for (int ic = 0; ic < in.c; ++ic) {
          const double* wk = wc + static_cast<std::size_t>(ic) * 9;
          const double* row0 = &in.v[(static_cast<std::size_t>(ic) * in.h + y) * in.w + x];
          const double* row1 = row0 + in.w;
          const double* row2 = row1 + in.w;
          acc += wk[0] * row0[0] + wk[1] * row0[1] + wk[2] * row0[2];
          acc += wk[3] * row1[0] + wk[4] * row1[1] + wk[5] * row1[2];
          acc += wk[6] * row2[0] + wk[7] * row2[1] + wk[8] * row2[2];
        }
        out.at(oc, y, x) = acc > 0.0 ? acc : 0.0;
      }
    }
  }
}

void conv3x3_backward(const Tensor& in, const Tensor& out, const Tensor& gout,
                      std::span<const double> w, int out_c, Tensor& gin, std::span<double> gw,
                      std::span<double> gb) {
  const int oh = out.h, ow = out.w;
  Tensor gpre(out_c, oh, ow);
  for (std::size_t i = 0; i < gpre.size(); ++i)
    gpre.v[i] = out.v[i] > 0.0 ? gout.v[i] : 0.0;

  for (int oc = 0; oc < out_c; ++oc) {
    double bsum = 0.0;
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        const double g = gpre.at(oc, y, x);
        if (g == 0.0) continue;
        bsum += g;
        for (int ic = 0; ic < in.c; ++ic) {
          double* gwk = gw.data() + (static_cast<std::size_t>(oc) * in.c + ic) * 9;
          for (int ky2 = 0; ky2 < 3; ++ky2)
            for (int kx2 = 0; kx2 < 3; ++kx2)
              gwk[ky2 * 3 + kx2] += g * in.at(ic, y + ky2, x + kx2);
        }
      }
    }
    gb[oc] += bsum;
  }

  gin = Tensor(in.c, in.h, in.w);
  for (int ic = 0; ic < in.c; ++ic) {
    for (int oc = 0; oc < out_c; ++oc) {
      const double* wk = w.data() + (static_cast<std::size_t>(oc) * in.c + ic) * 9;
      for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
          const double g = gpre.at(oc, y, x);
          if (g == 0.0) continue;
          for (int ky2 = 0; ky2 < 3; ++ky2)
            for (int kx2 = 0; kx2 < 3; ++kx2)
              gin.at(ic, y + ky2, x + kx2) += g * wk[ky2 * 3 + kx2];
        }
      }
    }
  }
}

void maxpool2(const Tensor& in, Tensor& out, std::vector<int>* argmax) {
  const int oh = in.h / 2, ow = in.w / 2;
  out = Tensor(in.c, oh, ow);
  if (argmax) argmax->assign(out.size(), 0);
  for (int c = 0; c < in.c; ++c) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        int best_idx = (static_cast<int>(static_cast<std::size_t>(c) * in.h + 2 * y)) * in.w + 2 * x;
        double best = in.v[best_idx];
        const int candidates[3] = {best_idx + 1, best_idx + in.w, best_idx + in.w + 1};
        for (int idx : candidates) {
          if (in.v[idx] > best) {
            best = in.v[idx];
            best_idx = idx;
          }
        }
        const std::size_t o = (static_cast<std::size_t>(c) * oh + y) * ow + x;
        out.v[o] = best;
        if (argmax) (*argmax)[o] = best_idx;
      }
    }
  }
}

void maxpool2_backward(const Tensor& gout, const std::vector<int>& argmax, Tensor& gin) {
  gin.zero();
  for (std::size_t i = 0; i < gout.size(); ++i) gin.v[argmax[i]] += gout.v[i];
}

void rbf_gram(const Matrix& X, double g, Matrix& out) {
  out = Matrix(X.rows, X.rows);
  for (int i = 0; i < X.rows; ++i) {
    out.at(i, i) = 1.0;
    for (int j = i + 1; j < X.rows; ++j) {
      double d2 = 0.0;
      for (int k = 0; k < X.cols; ++k) {
        const double d = X.at(i, k) - X.at(j, k);
        d2 += d * d;
      }
      out.at(i, j) = std::exp(-g * d2);
    }
  }
  for (int i = 1; i < X.rows; ++i)
    for (int j = 0; j < i; ++j) out.at(i, j) = out.at(j, i);
}

}  // namespace neoscan::ref
