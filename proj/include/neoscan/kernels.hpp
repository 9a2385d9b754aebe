#pragma once

#include <span>
#include <vector>

#include "neoscan/matrix.hpp"
#include "neoscan/tensor.hpp"

// OpenMP-parallel compute kernels. Every kernel is a pure function of its
// inputs and produces results independent of thread count and schedule:
// each output element is summed by a single thread in a fixed order.
// Serial twins live in neoscan::ref (ref/reference.hpp) and must match these
// bit for bit.
namespace neoscan::kernels {

// 3x3 valid convolution, stride 1, ReLU. w laid out [oc][ic][ky][kx], b [oc].
// out is resized to (out_c, in.h - 2, in.w - 2).
void conv3x3_relu(const Tensor& in, std::span<const double> w, std::span<const double> b,
                  int out_c, Tensor& out);

// Backward pass of conv3x3_relu. `out` is the forward result (its zeros gate
// the ReLU), `gout` the loss gradient at the output. gw/gb are accumulated
// (+=) so a batch can sum over samples; gin is overwritten.
void conv3x3_backward(const Tensor& in, const Tensor& out, const Tensor& gout,
                      std::span<const double> w, int out_c, Tensor& gin, std::span<double> gw,
                      std::span<double> gb);

// 2x2 max pooling, stride 2, floor semantics on odd extents. argmax, when
// non-null, records the flat input index of each winner (first max wins).
void maxpool2(const Tensor& in, Tensor& out, std::vector<int>* argmax);

// Scatters gout back through the recorded argmax indices. gin is overwritten.
void maxpool2_backward(const Tensor& gout, const std::vector<int>& argmax, Tensor& gin);

// Full RBF Gram matrix: out[i][j] = exp(-g * ||x_i - x_j||^2).
void rbf_gram(const Matrix& X, double g, Matrix& out);

}  // namespace neoscan::kernels
