#pragma once

#include <span>
#include <vector>

#include "neoscan/edgeprep.hpp"
#include "neoscan/image.hpp"
#include "neoscan/imgcore.hpp"
#include "neoscan/matrix.hpp"
#include "neoscan/tensor.hpp"

// Naive single-threaded implementations of the hot kernels. They exist as
// the correctness baseline: tests require the OpenMP kernels to reproduce
// them bit for bit, and the benchmark compares the two lanes.
namespace neoscan::ref {

GrayImage gaussian_blur(const GrayImage& img, const GaussianKernel& kernel);
SobelGradients sobel_gradients(const GrayImage& img);

void conv3x3_relu(const Tensor& in, std::span<const double> w, std::span<const double> b,
                  int out_c, Tensor& out);
void conv3x3_backward(const Tensor& in, const Tensor& out, const Tensor& gout,
                      std::span<const double> w, int out_c, Tensor& gin, std::span<double> gw,
                      std::span<double> gb);
void maxpool2(const Tensor& in, Tensor& out, std::vector<int>* argmax);
void maxpool2_backward(const Tensor& gout, const std::vector<int>& argmax, Tensor& gin);
void rbf_gram(const Matrix& X, double g, Matrix& out);

}  // namespace neoscan::ref
