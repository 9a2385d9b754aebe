#include "neoscan/kernels.hpp"

#include <cmath>

namespace neoscan::kernels {

void conv3x3_relu(const Tensor& in, std::span<const double> w, std::span<const double> b,
                  int out_c, Tensor& out) {
  const int oh = in.h - 2, ow = in.w - 2;
  out = Tensor(out_c, oh, ow);

#pragma omp parallel for
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

  // ReLU gate once, shared by all three gradient targets.
  Tensor gpre(out_c, oh, ow);
#pragma omp parallel for
  for (long i = 0; i < static_cast<long>(gpre.size()); ++i)
    gpre.v[i] = out.v[i] > 0.0 ? gout.v[i] : 0.0;

#pragma omp parallel for
  for (int oc = 0; oc < out_c; ++oc) {
    double* gwc = gw.data() + static_cast<std::size_t>(oc) * in.c * 9;
    double bsum = 0.0;
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        const double g = gpre.at(oc, y, x);
        if (g == 0.0) continue;
        bsum += g;
        for (int ic = 0; ic < in.c; ++ic) {
          double* gwk = gwc + static_cast<std::size_t>(ic) * 9;
          const double* row0 = &in.v[(static_cast<std::size_t>(ic) * in.h + y) * in.w + x];
          const double* row1 = row0 + in.w;
          const double* row2 = row1 + in.w;
          gwk[0] += g * row0[0];
          gwk[1] += g * row0[1];
          gwk[2] += g * row0[2];
          gwk[3] += g * row1[0];
          gwk[4] += g * row1[1];
          gwk[5] += g * row1[2];
          gwk[6] += g * row2[0];
          gwk[7] += g * row2[1];
          gwk[8] += g * row2[2];
        }
      }
    }
    gb[oc] += bsum;
  }

  gin = Tensor(in.c, in.h, in.w);
#pragma omp parallel for
  for (int ic = 0; ic < in.c; ++ic) {
    for (int oc = 0; oc < out_c; ++oc) {
      const double* wk = w.data() + (static_cast<std::size_t>(oc) * in.c + ic) * 9;
      for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
          const double g = gpre.at(oc, y, x);
          if (g == 0.0) continue;
          double* row0 = &gin.v[(static_cast<std::size_t>(ic) * in.h + y) * in.w + x];
          double* row1 = row0 + in.w;
          double* row2 = row1 + in.w;
          row0[0] += g * wk[0];
          row0[1] += g * wk[1];
          row0[2] += g * wk[2];
          row1[0] += g * wk[3];
          row1[1] += g * wk[4];
          row1[2] += g * wk[5];
          row2[0] += g * wk[6];
          row2[1] += g * wk[7];
          row2[2] += g * wk[8];
        }
      }
    }
  }
}

void maxpool2(const Tensor& in, Tensor& out, std::vector<int>* argmax) {
  const int oh = in.h / 2, ow = in.w / 2;
  out = Tensor(in.c, oh, ow);
  if (argmax) argmax->assign(out.size(), 0);

#pragma omp parallel for
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
  // Pool windows are disjoint, so each target index appears at most once.
#pragma omp parallel for
  for (long i = 0; i < static_cast<long>(gout.size()); ++i) gin.v[argmax[i]] += gout.v[i];
}

void rbf_gram(const Matrix& X, double g, Matrix& out) {
  out = Matrix(X.rows, X.rows);

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < X.rows; ++i) {
    const double* xi = X.v.data() + static_cast<std::size_t>(i) * X.cols;
    out.at(i, i) = 1.0;
    for (int j = i + 1; j < X.rows; ++j) {
      const double* xj = X.v.data() + static_cast<std::size_t>(j) * X.cols;
      double d2 = 0.0;
      for (int k = 0; k < X.cols; ++k) {
        const double d = xi[k] - xj[k];
        d2 += d * d;
      }
      out.at(i, j) = std::exp(-g * d2);
    }
  }
  // Mirror the upper triangle; keeps the matrix exactly symmetric.
  for (int i = 1; i < X.rows; ++i)
    for (int j = 0; j < i; ++j) out.at(i, j) = out.at(j, i);
}

}  // namespace neoscan::kernels
