#include "neoscan/convnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "neoscan/kernels.hpp"
#include "neoscan/rng.hpp"

namespace neoscan {

LayerPlan mri_extractor_plan() {
  LayerPlan p;
  p.input_h = p.input_w = 150;
  p.layers = {
      {LayerKind::Conv, 32}, {LayerKind::MaxPool, 0},                        // -> 74x74x32
      {LayerKind::Conv, 64}, {LayerKind::Conv, 64}, {LayerKind::MaxPool, 0}, // -> 35x35x64
      {LayerKind::Conv, 96}, {LayerKind::MaxPool, 0},                        // -> 16x16x96
      {LayerKind::Conv, 96}, {LayerKind::MaxPool, 0},                        // -> 7x7x96
      {LayerKind::Conv, 64}, {LayerKind::MaxPool, 0},                        // -> 2x2x64
  };
  return p;
}

LayerPlan small_extractor_plan() {
  LayerPlan p;
  p.input_h = p.input_w = 24;
  p.layers = {
      {LayerKind::Conv, 8},  {LayerKind::MaxPool, 0},  // -> 11x11x8
      {LayerKind::Conv, 16}, {LayerKind::MaxPool, 0},  // -> 4x4x16
      {LayerKind::Conv, 16}, {LayerKind::MaxPool, 0},  // -> 1x1x16
  };
  return p;
}

std::vector<Shape> plan_shapes(const LayerPlan& plan) {
  if (plan.input_h < 1 || plan.input_w < 1)
    throw std::invalid_argument("plan_shapes: input dimensions must be >= 1");

  std::vector<Shape> shapes;
  shapes.reserve(plan.layers.size());
  Shape s{1, plan.input_h, plan.input_w};
  for (const LayerDesc& d : plan.layers) {
    if (d.kind == LayerKind::Conv) {
      if (d.filters < 1) throw std::invalid_argument("plan_shapes: conv layer needs filters >= 1");
      if (s.h < 3 || s.w < 3)
        throw std::invalid_argument("plan_shapes: input too small for a 3x3 valid convolution");
      s = {d.filters, s.h - 2, s.w - 2};
    } else {
      if (s.h < 2 || s.w < 2)
        throw std::invalid_argument("plan_shapes: input too small for a 2x2 pool");
      s = {s.c, s.h / 2, s.w / 2};
    }
    shapes.push_back(s);
  }
  return shapes;
}

long plan_param_count(const LayerPlan& plan) {
  long total = 0;
  int in_c = 1;
  for (const LayerDesc& d : plan.layers) {
    if (d.kind == LayerKind::Conv) {
      total += static_cast<long>(d.filters) * (9L * in_c + 1);
      in_c = d.filters;
    }
  }
  return total;
}

int feature_dim(const LayerPlan& plan, FeatureTap tap) {
  const auto shapes = plan_shapes(plan);
  long dim = 0;
  bool any_pool = false;
  for (std::size_t i = 0; i < plan.layers.size(); ++i) {
    if (plan.layers[i].kind != LayerKind::MaxPool) continue;
    any_pool = true;
    const long vol = static_cast<long>(shapes[i].c) * shapes[i].h * shapes[i].w;
    if (tap == FeatureTap::AllPools)
      dim += vol;
    else
      dim = vol;  // keep the last pool
  }
  if (!any_pool) throw std::invalid_argument("feature_dim: plan has no pooling layer");
  return static_cast<int>(dim);
}

namespace {

std::vector<double> he_uniform(std::size_t count, int fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / fan_in);
  std::vector<double> w(count);
  for (double& x : w) x = rng.uniform(-limit, limit);
  return w;
}

}  // namespace

ConvNet build(const LayerPlan& plan, std::uint64_t seed) {
  plan_shapes(plan);  // validate

  ConvNet net;
  net.plan = plan;
  net.seed = seed;

  Rng rng(seed);
  int in_c = 1;
  for (const LayerDesc& d : plan.layers) {
    if (d.kind != LayerKind::Conv) continue;
    ConvLayer layer;
    layer.in_c = in_c;
    layer.out_c = d.filters;
    layer.w = he_uniform(static_cast<std::size_t>(d.filters) * in_c * 9, in_c * 9, rng);
    layer.b.assign(d.filters, 0.0);
    net.conv.push_back(std::move(layer));
    in_c = d.filters;
  }
  return net;
}

Tensor image_to_tensor(const GrayImage& img) {
  Tensor t(1, img.height, img.width);
  for (std::size_t i = 0; i < img.size(); ++i) t.v[i] = img.pixels[i] / 255.0;
  return t;
}

namespace {

// Forward pass keeping pool argmax indices for backprop.
struct FwdState {
  Tensor input;
  std::vector<Tensor> acts;               // per layer
  std::vector<std::vector<int>> argmax;   // per layer; empty for conv layers
};

void run_forward(const ConvNet& net, const GrayImage& img, bool keep_argmax, FwdState& fs) {
  if (img.height != net.plan.input_h || img.width != net.plan.input_w)
    throw std::invalid_argument("forward: image does not match the plan input size");

  fs.input = image_to_tensor(img);
  fs.acts.resize(net.plan.layers.size());
  fs.argmax.assign(net.plan.layers.size(), {});

  const Tensor* cur = &fs.input;
  std::size_t conv_i = 0;
  for (std::size_t l = 0; l < net.plan.layers.size(); ++l) {
    if (net.plan.layers[l].kind == LayerKind::Conv) {
      const ConvLayer& c = net.conv[conv_i++];
      kernels::conv3x3_relu(*cur, c.w, c.b, c.out_c, fs.acts[l]);
    } else {
      kernels::maxpool2(*cur, fs.acts[l], keep_argmax ? &fs.argmax[l] : nullptr);
    }
    cur = &fs.acts[l];
  }
}

std::vector<double> flatten(const Tensor& t) { return t.v; }

// Stable softmax-cross-entropy: returns per-class probabilities and the loss
// log(sum exp(z - m)) - (z[label] - m).
double softmax_ce(const std::vector<double>& z, int label, std::vector<double>& p) {
  const double m = *std::max_element(z.begin(), z.end());
  p.resize(z.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    p[k] = std::exp(z[k] - m);
    sum += p[k];
  }
  for (double& q : p) q /= sum;
  return std::log(sum) - (z[label] - m);
}

}  // namespace

Activations forward(const ConvNet& net, const GrayImage& img) {
  FwdState fs;
  run_forward(net, img, false, fs);
  Activations a;
  a.t = std::move(fs.acts);
  return a;
}

std::vector<double> extract(const ConvNet& net, const GrayImage& img, FeatureTap tap) {
  FwdState fs;
  run_forward(net, img, false, fs);

  std::vector<double> out;
  out.reserve(feature_dim(net.plan, tap));
  for (std::size_t l = 0; l < net.plan.layers.size(); ++l) {
    if (net.plan.layers[l].kind != LayerKind::MaxPool) continue;
    if (tap == FeatureTap::FinalPool) out.clear();
    out.insert(out.end(), fs.acts[l].v.begin(), fs.acts[l].v.end());
  }
  return out;
}

DenseHead build_head(int in_dim, int hidden, int classes, std::uint64_t seed) {
  if (in_dim < 1 || hidden < 1 || classes < 2)
    throw std::invalid_argument("build_head: need in_dim, hidden >= 1 and classes >= 2");

  DenseHead h;
  h.in_dim = in_dim;
  h.hidden = hidden;
  h.classes = classes;
  Rng rng(seed);
  h.w1 = he_uniform(static_cast<std::size_t>(hidden) * in_dim, in_dim, rng);
  h.b1.assign(hidden, 0.0);
  h.w2 = he_uniform(static_cast<std::size_t>(classes) * hidden, hidden, rng);
  h.b2.assign(classes, 0.0);
  return h;
}

std::vector<double> head_probabilities(const ConvNet& net, const DenseHead& head,
                                       const GrayImage& img) {
  FwdState fs;
  run_forward(net, img, false, fs);
  const std::vector<double> f = flatten(fs.acts.back());
  if (static_cast<int>(f.size()) != head.in_dim)
    throw std::invalid_argument("head_probabilities: head does not match the net output");

  std::vector<double> z1(head.hidden);
  for (int h = 0; h < head.hidden; ++h) {
    double acc = head.b1[h];
    const double* wr = head.w1.data() + static_cast<std::size_t>(h) * head.in_dim;
    for (int i = 0; i < head.in_dim; ++i) acc += wr[i] * f[i];
    z1[h] = acc > 0.0 ? acc : 0.0;
  }
  std::vector<double> z2(head.classes);
  for (int k = 0; k < head.classes; ++k) {
    double acc = head.b2[k];
    const double* wr = head.w2.data() + static_cast<std::size_t>(k) * head.hidden;
    for (int h = 0; h < head.hidden; ++h) acc += wr[h] * z1[h];
    z2[k] = acc;
  }
  std::vector<double> p;
  softmax_ce(z2, 0, p);
  return p;
}

Gradients zero_gradients(const ConvNet& net, const DenseHead& head) {
  Gradients g;
  g.conv_w.resize(net.conv.size());
  g.conv_b.resize(net.conv.size());
  for (std::size_t i = 0; i < net.conv.size(); ++i) {
    g.conv_w[i].assign(net.conv[i].w.size(), 0.0);
    g.conv_b[i].assign(net.conv[i].b.size(), 0.0);
  }
  g.w1.assign(head.w1.size(), 0.0);
  g.b1.assign(head.b1.size(), 0.0);
  g.w2.assign(head.w2.size(), 0.0);
  g.b2.assign(head.b2.size(), 0.0);
  return g;
}

double batch_loss_and_gradients(const ConvNet& net, const DenseHead& head,
                                std::span<const LabeledImage> batch, Gradients* g, int* correct) {
  if (batch.empty()) throw std::invalid_argument("batch_loss_and_gradients: empty batch");
  if (g) *g = zero_gradients(net, head);

  double loss_sum = 0.0;
  int hits = 0;

  FwdState fs;
  std::vector<double> z1(head.hidden), a1(head.hidden), z2(head.classes), p;
  for (const LabeledImage& s : batch) {
    if (s.label < 0 || s.label >= head.classes)
      throw std::invalid_argument("batch_loss_and_gradients: label out of range");

    run_forward(net, s.image, g != nullptr, fs);
    const std::vector<double> f = flatten(fs.acts.back());
    if (static_cast<int>(f.size()) != head.in_dim)
      throw std::invalid_argument("batch_loss_and_gradients: head does not match the net output");

    for (int h = 0; h < head.hidden; ++h) {
      double acc = head.b1[h];
      const double* wr = head.w1.data() + static_cast<std::size_t>(h) * head.in_dim;
      for (int i = 0; i < head.in_dim; ++i) acc += wr[i] * f[i];
      z1[h] = acc;
      a1[h] = acc > 0.0 ? acc : 0.0;
    }
    for (int k = 0; k < head.classes; ++k) {
      double acc = head.b2[k];
      const double* wr = head.w2.data() + static_cast<std::size_t>(k) * head.hidden;
      for (int h = 0; h < head.hidden; ++h) acc += wr[h] * a1[h];
      z2[k] = acc;
    }
    loss_sum += softmax_ce(z2, s.label, p);
    if (static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin()) == s.label) ++hits;

    if (!g) continue;

    // dL/dz2 = p - onehot(label)
    std::vector<double> dz2 = p;
    dz2[s.label] -= 1.0;
    std::vector<double> da1(head.hidden, 0.0);
    for (int k = 0; k < head.classes; ++k) {
      const double d = dz2[k];
      g->b2[k] += d;
      double* gw = g->w2.data() + static_cast<std::size_t>(k) * head.hidden;
      const double* wr = head.w2.data() + static_cast<std::size_t>(k) * head.hidden;
      for (int h = 0; h < head.hidden; ++h) {
        gw[h] += d * a1[h];
        da1[h] += d * wr[h];
      }
    }
    std::vector<double> df(head.in_dim, 0.0);
    for (int h = 0; h < head.hidden; ++h) {
      const double d = z1[h] > 0.0 ? da1[h] : 0.0;
      if (d == 0.0) continue;
      g->b1[h] += d;
      double* gw = g->w1.data() + static_cast<std::size_t>(h) * head.in_dim;
      const double* wr = head.w1.data() + static_cast<std::size_t>(h) * head.in_dim;
      for (int i = 0; i < head.in_dim; ++i) {
        gw[i] += d * f[i];
        df[i] += d * wr[i];
      }
    }

    // Back through the extractor.
    const Tensor& last = fs.acts.back();
    Tensor gout(last.c, last.h, last.w);
    gout.v = std::move(df);
    Tensor gin;
    std::size_t conv_i = net.conv.size();
    for (std::size_t l = net.plan.layers.size(); l-- > 0;) {
      const Tensor& in = l == 0 ? fs.input : fs.acts[l - 1];
      if (net.plan.layers[l].kind == LayerKind::MaxPool) {
        gin = Tensor(in.c, in.h, in.w);
        kernels::maxpool2_backward(gout, fs.argmax[l], gin);
      } else {
        const ConvLayer& c = net.conv[--conv_i];
        kernels::conv3x3_backward(in, fs.acts[l], gout, c.w, c.out_c, gin, g->conv_w[conv_i],
                                  g->conv_b[conv_i]);
      }
      if (l == 0) break;  // gradient w.r.t. the image is not needed
      gout = std::move(gin);
    }
  }

  const double inv_n = 1.0 / batch.size();
  if (g) {
    for (auto& v : g->conv_w)
      for (double& x : v) x *= inv_n;
    for (auto& v : g->conv_b)
      for (double& x : v) x *= inv_n;
    for (double& x : g->w1) x *= inv_n;
    for (double& x : g->b1) x *= inv_n;
    for (double& x : g->w2) x *= inv_n;
    for (double& x : g->b2) x *= inv_n;
  }
  if (correct) *correct = hits;
  return loss_sum * inv_n;
}

namespace {

void momentum_step(std::vector<double>& param, std::vector<double>& vel,
                   const std::vector<double>& grad, double momentum, double lr) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    vel[i] = momentum * vel[i] - lr * grad[i];
    param[i] += vel[i];
  }
}

}  // namespace

TrainCurve train(ConvNet& net, const std::vector<LabeledImage>& data, const TrainConfig& cfg,
                 DenseHead* head_out) {
  if (data.empty()) throw std::invalid_argument("train: no data");
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (cfg.batch < 1) throw std::invalid_argument("train: batch must be >= 1");

  int classes = 0;
  for (const LabeledImage& s : data) {
    if (s.label < 0) throw std::invalid_argument("train: negative label");
    classes = std::max(classes, s.label + 1);
  }
  const bool single_class =
      std::all_of(data.begin(), data.end(),
                  [&](const LabeledImage& s) { return s.label == data.front().label; });
  if (single_class) throw std::invalid_argument("train: need at least two classes");

  const auto shapes = plan_shapes(net.plan);
  const Shape out = shapes.back();
  const int in_dim = out.c * out.h * out.w;

  Rng rng(cfg.seed);
  DenseHead head = build_head(in_dim, cfg.hidden, classes, rng.next_u64());

  Gradients vel = zero_gradients(net, head);
  Gradients grad;

  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  TrainCurve curve;
  curve.loss.reserve(cfg.epochs);
  curve.accuracy.reserve(cfg.epochs);

  std::vector<LabeledImage> batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);

    double loss_sum = 0.0;
    long correct_sum = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);

      int correct = 0;
      const double loss = batch_loss_and_gradients(net, head, batch, &grad, &correct);
      loss_sum += loss * batch.size();
      correct_sum += correct;

      std::size_t conv_i = 0;
      for (ConvLayer& c : net.conv) {
        momentum_step(c.w, vel.conv_w[conv_i], grad.conv_w[conv_i], cfg.momentum, cfg.lr);
        momentum_step(c.b, vel.conv_b[conv_i], grad.conv_b[conv_i], cfg.momentum, cfg.lr);
        ++conv_i;
      }
      momentum_step(head.w1, vel.w1, grad.w1, cfg.momentum, cfg.lr);
      momentum_step(head.b1, vel.b1, grad.b1, cfg.momentum, cfg.lr);
      momentum_step(head.w2, vel.w2, grad.w2, cfg.momentum, cfg.lr);
      momentum_step(head.b2, vel.b2, grad.b2, cfg.momentum, cfg.lr);
    }

    curve.loss.push_back(loss_sum / data.size());
    curve.accuracy.push_back(static_cast<double>(correct_sum) / data.size());
  }

  if (head_out) *head_out = std::move(head);
  return curve;
}

}  // namespace neoscan
