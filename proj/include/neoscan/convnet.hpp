#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "neoscan/image.hpp"
#include "neoscan/tensor.hpp"

namespace neoscan {

enum class LayerKind { Conv, MaxPool };

struct LayerDesc {
  LayerKind kind = LayerKind::Conv;
  int filters = 0;  // conv layers only

  bool operator==(const LayerDesc&) const = default;
};

// Feature-extractor architecture: a stack of 3x3 valid-padding convolutions
// (stride 1, ReLU) and 2x2 stride-2 max pools over a single-channel input.
struct LayerPlan {
  int input_h = 0;
  int input_w = 0;
  std::vector<LayerDesc> layers;

  bool operator==(const LayerPlan&) const = default;
};

// The production plan: 150x150 input, five conv blocks
// (32 | 64 64 | 96 | 96 | 64 filters), pool after each block.
LayerPlan mri_extractor_plan();

// Scaled-down plan (24x24 input) for tests and quick experiments.
LayerPlan small_extractor_plan();

struct Shape {
  int c = 0, h = 0, w = 0;
  bool operator==(const Shape&) const = default;
};

// Output shape of every layer in order. Throws std::invalid_argument if a
// layer would underflow the spatial extent.
std::vector<Shape> plan_shapes(const LayerPlan& plan);

// Trainable parameters in the extractor (conv weights + biases).
long plan_param_count(const LayerPlan& plan);

// Which activations feed the feature vector: the final pool output alone,
// or every pool output concatenated in order.
enum class FeatureTap { FinalPool, AllPools };

int feature_dim(const LayerPlan& plan, FeatureTap tap);

struct ConvLayer {
  int in_c = 0;
  int out_c = 0;
  std::vector<double> w;  // [oc][ic][ky][kx], 3x3 kernels
  std::vector<double> b;  // [oc]
};

struct ConvNet {
  LayerPlan plan;
  std::vector<ConvLayer> conv;  // one per Conv layer, in plan order
  std::uint64_t seed = 0;
};

// He-uniform weights, zero biases, deterministic under seed.
ConvNet build(const LayerPlan& plan, std::uint64_t seed);

// Pixel intensities scaled to [0, 1] in a 1-channel tensor.
Tensor image_to_tensor(const GrayImage& img);

// Post-activation output of every layer, in plan order.
struct Activations {
  std::vector<Tensor> t;
};

// Throws std::invalid_argument when the image does not match the plan input.
Activations forward(const ConvNet& net, const GrayImage& img);

// Flattened feature vector from the configured tap.
std::vector<double> extract(const ConvNet& net, const GrayImage& img,
                            FeatureTap tap = FeatureTap::FinalPool);

struct LabeledImage {
  GrayImage image;
  int label = 0;  // in [0, classes)
};

// Temporary classification head used only while training the extractor:
// flatten(final pool) -> dense ReLU -> dense softmax.
struct DenseHead {
  int in_dim = 0;
  int hidden = 0;
  int classes = 0;
  std::vector<double> w1, b1;  // [hidden][in_dim], [hidden]
  std::vector<double> w2, b2;  // [classes][hidden], [classes]
};

DenseHead build_head(int in_dim, int hidden, int classes, std::uint64_t seed);

// Class probabilities for one image under net + head.
std::vector<double> head_probabilities(const ConvNet& net, const DenseHead& head,
                                       const GrayImage& img);

// Parameter gradients mirroring ConvNet + DenseHead layouts.
struct Gradients {
  std::vector<std::vector<double>> conv_w, conv_b;
  std::vector<double> w1, b1, w2, b2;
};

Gradients zero_gradients(const ConvNet& net, const DenseHead& head);

// Mean cross-entropy over the batch. When g is non-null it is overwritten
// with the mean parameter gradients; when correct is non-null it receives
// the number of argmax hits. The loss-only form backs the finite-difference
// gradient tests.
double batch_loss_and_gradients(const ConvNet& net, const DenseHead& head,
                                std::span<const LabeledImage> batch, Gradients* g,
                                int* correct = nullptr);

struct TrainConfig {
  int epochs = 50;
  double lr = 0.01;
  double momentum = 0.9;
  int batch = 16;
  int hidden = 64;
  std::uint64_t seed = 0;
};

// Per-epoch running mean loss and accuracy, one entry per epoch.
struct TrainCurve {
  std::vector<double> loss;
  std::vector<double> accuracy;
};

// Mini-batch SGD with momentum through a temporary dense head. The head is
// discarded unless head_out is non-null; the extractor weights stay behind
// in net. Deterministic for a fixed (seed, data order).
TrainCurve train(ConvNet& net, const std::vector<LabeledImage>& data, const TrainConfig& cfg,
                 DenseHead* head_out = nullptr);

}  // namespace neoscan
