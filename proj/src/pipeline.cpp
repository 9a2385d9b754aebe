#include "neoscan/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <stdexcept>

#include "neoscan/edgeprep.hpp"
#include "neoscan/errors.hpp"
#include "neoscan/image_io.hpp"
#include "neoscan/imgcore.hpp"
#include "neoscan/rng.hpp"

namespace neoscan {

namespace fs = std::filesystem;

std::string to_string(ClassLabel label) {
  switch (label) {
    case ClassLabel::Normal: return "normal";
    case ClassLabel::Benign: return "benign";
    case ClassLabel::Malignant: return "malignant";
  }
  return "?";
}

namespace {

constexpr ClassLabel kClasses[] = {ClassLabel::Normal, ClassLabel::Benign,
                                   ClassLabel::Malignant};

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".pgm" || ext == ".png";
}

const char* stage_starved(ClassLabel label) {
  return label == ClassLabel::Normal ? "stage 1 (presence)" : "stage 2 (severity)";
}

// Rethrows stage-module errors with the stage name prepended.
template <typename Fn>
auto at_stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(name) + ": " + e.what());
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(std::string(name) + ": " + e.what());
  }
}

}  // namespace

std::vector<Sample> ingest(const fs::path& root) {
  std::vector<Sample> samples;
  std::string failures;

  for (ClassLabel label : kClasses) {
    const fs::path dir = root / to_string(label);
    std::vector<fs::path> files;
    if (fs::is_directory(dir)) {
      for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

    if (files.empty())
      throw std::invalid_argument("ingest: no images under '" + dir.string() + "' — " +
                                  stage_starved(label) + " has no data");

    for (const fs::path& file : files) {
      try {
        Sample s;
        s.image = read_image(file);
        s.label = label;
        s.id = to_string(label) + "/" + file.filename().string();
        samples.push_back(std::move(s));
      } catch (const std::exception& e) {
        failures += file.string() + ": " + e.what() + "\n";
      }
    }
  }

  if (!failures.empty()) throw FormatError("ingest: unreadable files\n" + failures);
  return samples;
}

std::pair<std::vector<Sample>, std::vector<Sample>> split(const std::vector<Sample>& samples,
                                                          double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw std::invalid_argument("split: ratio must be strictly between 0 and 1");

  std::vector<std::vector<int>> groups(3);
  for (int i = 0; i < static_cast<int>(samples.size()); ++i)
    groups[static_cast<int>(samples[i].label)].push_back(i);

  Rng rng(seed);
  std::vector<Sample> train_set, test_set;
  for (ClassLabel label : kClasses) {
    auto& idx = groups[static_cast<int>(label)];
    if (idx.size() < 2)
      throw std::invalid_argument("split: class '" + to_string(label) +
                                  "' needs at least 2 samples");
    rng.shuffle(idx);
    const int n = static_cast<int>(idx.size());
    const int take = std::clamp(static_cast<int>(std::floor(ratio * n)), 1, n - 1);
    for (int i = 0; i < n; ++i)
      (i < take ? train_set : test_set).push_back(samples[idx[i]]);
  }
  return {std::move(train_set), std::move(test_set)};
}

GrayImage basic_preprocess(const GrayImage& img, int out_w, int out_h, double sigma) {
  return equalize(gaussian_blur(resize(img, out_w, out_h), gaussian_kernel(sigma)));
}

GrayImage preprocess_for_model(const GrayImage& img, const LayerPlan& plan, double sigma,
                               int contour_levels, bool special_prep) {
  GrayImage out = basic_preprocess(img, plan.input_w, plan.input_h, sigma);
  if (special_prep) out = special_preprocess(out, contour_levels);
  return out;
}

namespace {

std::vector<GrayImage> preprocess_all(const std::vector<Sample>& samples,
                                      const PipelineConfig& cfg) {
  std::vector<GrayImage> out(samples.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(samples.size()); ++i) {
    try {
      out[i] = preprocess_for_model(samples[i].image, cfg.plan, cfg.sigma, cfg.contour_levels,
                                    cfg.special_prep);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

Matrix extract_features(const ConvNet& net, const std::vector<GrayImage>& images,
                        FeatureTap tap) {
  const int dim = feature_dim(net.plan, tap);
  Matrix F(static_cast<int>(images.size()), dim);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(images.size()); ++i) {
    try {
      const std::vector<double> f = extract(net, images[i], tap);
      std::copy(f.begin(), f.end(), F.row(static_cast<int>(i)).begin());
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return F;
}

struct StageFit {
  FeatureMask mask;
  SvmModel svm;
};

StageFit fit_stage(const char* name, const Matrix& F, const std::vector<int>& y,
                   const PipelineConfig& cfg, double C, double g) {
  return at_stage(name, [&] {
    std::vector<double> yd(y.begin(), y.end());
    const double lmax = lasso_lambda_max(F, yd);
    const LassoModel lasso = fit_lasso(F, yd, cfg.lambda_frac * lmax);

    StageFit s;
    s.mask = mask(lasso);
    if (s.mask.count() == 0)
      throw ConvergenceError("feature selection produced an empty mask");
    s.svm = train_svm(apply_mask(F, s.mask), y, KernelSpec{g}, CostSpec{C, cfg.cost_ratio},
                      cfg.svm_tol, cfg.svm_max_passes);
    return s;
  });
}

}  // namespace

PipelineModel fit(const std::vector<Sample>& train_set, const PipelineConfig& cfg,
                  TrainCurve* curve) {
  long counts[3] = {0, 0, 0};
  for (const Sample& s : train_set) ++counts[static_cast<int>(s.label)];
  if (counts[0] == 0 || counts[1] + counts[2] == 0)
    throw std::invalid_argument(
        "fit: stage 1 (presence) needs both normal and neoplasm samples");
  if (counts[1] == 0 || counts[2] == 0)
    throw std::invalid_argument(
        "fit: stage 2 (severity) needs both benign and malignant samples");

  const std::vector<GrayImage> processed = preprocess_all(train_set, cfg);

  PipelineModel model;
  model.tap = cfg.tap;
  model.sigma = cfg.sigma;
  model.contour_levels = cfg.contour_levels;
  model.special_prep = cfg.special_prep;

  Rng seeder(cfg.seed);
  model.net = build(cfg.plan, seeder.next_u64());

  std::vector<LabeledImage> labeled(train_set.size());
  for (std::size_t i = 0; i < train_set.size(); ++i) {
    labeled[i].image = processed[i];
    labeled[i].label = train_set[i].label == ClassLabel::Normal ? 0 : 1;
  }
  TrainConfig tc = cfg.train;
  tc.seed = seeder.next_u64();
  TrainCurve tcurve = train(model.net, labeled, tc);
  if (curve) *curve = std::move(tcurve);

  const Matrix F = extract_features(model.net, processed, cfg.tap);

  // Stage 1: neoplasm present (+1, protected) vs normal (-1).
  std::vector<int> y1(train_set.size());
  for (std::size_t i = 0; i < train_set.size(); ++i)
    y1[i] = train_set[i].label == ClassLabel::Normal ? -1 : 1;
  StageFit s1 = fit_stage("stage 1 (presence)", F, y1, cfg, cfg.presence_C, cfg.presence_g);
  model.mask_presence = std::move(s1.mask);
  model.svm_presence = std::move(s1.svm);

  // Stage 2: malignant (+1, protected) vs benign (-1), neoplasm samples only.
  std::vector<int> rows;
  for (int i = 0; i < static_cast<int>(train_set.size()); ++i)
    if (train_set[i].label != ClassLabel::Normal) rows.push_back(i);
  Matrix F2(static_cast<int>(rows.size()), F.cols);
  std::vector<int> y2(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(F.row(rows[i]).begin(), F.row(rows[i]).end(), F2.row(static_cast<int>(i)).begin());
    y2[i] = train_set[rows[i]].label == ClassLabel::Malignant ? 1 : -1;
  }
  StageFit s2 = fit_stage("stage 2 (severity)", F2, y2, cfg, cfg.severity_C, cfg.severity_g);
  model.mask_severity = std::move(s2.mask);
  model.svm_severity = std::move(s2.svm);

  return model;
}

PipelinePrediction predict(const PipelineModel& model, const GrayImage& img) {
  const GrayImage p = preprocess_for_model(img, model.net.plan, model.sigma,
                                           model.contour_levels, model.special_prep);
  const std::vector<double> f = extract(model.net, p, model.tap);

  PipelinePrediction out;
  const Decision d1 = decide(model.svm_presence, apply_mask(f, model.mask_presence));
  out.presence_score = d1.score;
  if (d1.label < 0) {
    out.label = ClassLabel::Normal;
    return out;
  }
  const Decision d2 = decide(model.svm_severity, apply_mask(f, model.mask_severity));
  out.severity_evaluated = true;
  out.severity_score = d2.score;
  out.label = d2.label > 0 ? ClassLabel::Malignant : ClassLabel::Benign;
  return out;
}

EvaluationReport evaluate(const PipelineModel& model, const std::vector<Sample>& test) {
  if (test.empty()) throw std::invalid_argument("evaluate: empty test set");

  EvaluationReport r;
  for (const Sample& s : test) {
    const GrayImage p = preprocess_for_model(s.image, model.net.plan, model.sigma,
                                             model.contour_levels, model.special_prep);
    const std::vector<double> f = extract(model.net, p, model.tap);

    const bool truly_present = s.label != ClassLabel::Normal;
    const Decision d1 = decide(model.svm_presence, apply_mask(f, model.mask_presence));
    if (truly_present)
      (d1.label > 0 ? r.presence.tp : r.presence.fn)++;
    else
      (d1.label > 0 ? r.presence.fp : r.presence.tn)++;

    if (!truly_present) continue;
    // Routed by ground truth so stage-1 errors do not contaminate stage 2.
    const Decision d2 = decide(model.svm_severity, apply_mask(f, model.mask_severity));
    const bool truly_malignant = s.label == ClassLabel::Malignant;
    if (truly_malignant)
      (d2.label > 0 ? r.severity.tp : r.severity.fn)++;
    else
      (d2.label > 0 ? r.severity.fp : r.severity.tn)++;
  }

  r.presence_metrics = metrics(r.presence);
  r.severity_valid = r.severity.total() > 0;
  if (r.severity_valid) r.severity_metrics = metrics(r.severity);
  return r;
}

namespace {

// --- model file ---------------------------------------------------------
// "NSCM" | u32 version | preprocessing | layer plan | conv weights |
// two masks | two SVMs. Everything little-endian; doubles as IEEE-754 bits.

constexpr char kMagic[4] = {'N', 'S', 'C', 'M'};
constexpr std::uint32_t kVersion = 1;

void wr_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void wr_u8(std::ostream& os, std::uint8_t v) { wr_bytes(os, &v, 1); }

void wr_u32(std::ostream& os, std::uint32_t v) {
  std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                       static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
  wr_bytes(os, b, 4);
}

void wr_u64(std::ostream& os, std::uint64_t v) {
  wr_u32(os, static_cast<std::uint32_t>(v));
  wr_u32(os, static_cast<std::uint32_t>(v >> 32));
}

void wr_i32(std::ostream& os, std::int32_t v) { wr_u32(os, static_cast<std::uint32_t>(v)); }

void wr_f64(std::ostream& os, double v) { wr_u64(os, std::bit_cast<std::uint64_t>(v)); }

void wr_f64v(std::ostream& os, const std::vector<double>& v) {
  wr_u64(os, v.size());
  for (double x : v) wr_f64(os, x);
}

std::uint8_t rd_u8(std::istream& is) {
  char c;
  if (!is.get(c)) throw FormatError("model file: truncated");
  return static_cast<std::uint8_t>(c);
}

std::uint32_t rd_u32(std::istream& is) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(rd_u8(is)) << (8 * i);
  return v;
}

std::uint64_t rd_u64(std::istream& is) {
  const std::uint64_t lo = rd_u32(is);
  return lo | (static_cast<std::uint64_t>(rd_u32(is)) << 32);
}

std::int32_t rd_i32(std::istream& is) { return static_cast<std::int32_t>(rd_u32(is)); }

double rd_f64(std::istream& is) { return std::bit_cast<double>(rd_u64(is)); }

std::vector<double> rd_f64v(std::istream& is, std::uint64_t max_len) {
  const std::uint64_t n = rd_u64(is);
  if (n > max_len) throw FormatError("model file: implausible array length");
  std::vector<double> v(n);
  for (double& x : v) x = rd_f64(is);
  return v;
}

void wr_mask(std::ostream& os, const FeatureMask& m) {
  wr_u32(os, static_cast<std::uint32_t>(m.selected.size()));
  std::uint8_t byte = 0;
  int used = 0;
  for (std::size_t j = 0; j < m.selected.size(); ++j) {
    if (m.selected[j]) byte |= static_cast<std::uint8_t>(1u << used);
    if (++used == 8 || j + 1 == m.selected.size()) {
      wr_u8(os, byte);
      byte = 0;
      used = 0;
    }
  }
}

FeatureMask rd_mask(std::istream& is) {
  const std::uint32_t dim = rd_u32(is);
  if (dim > (1u << 28)) throw FormatError("model file: implausible mask size");
  FeatureMask m;
  m.selected.resize(dim);
  std::uint8_t byte = 0;
  for (std::uint32_t j = 0; j < dim; ++j) {
    if (j % 8 == 0) byte = rd_u8(is);
    m.selected[j] = (byte >> (j % 8)) & 1u;
  }
  return m;
}

void wr_svm(std::ostream& os, const SvmModel& m) {
  wr_f64(os, m.kernel.g);
  wr_f64(os, m.cost.C);
  wr_f64(os, m.cost.r);
  wr_f64(os, m.bias);
  wr_i32(os, m.support_vectors.rows);
  wr_i32(os, m.support_vectors.cols);
  for (double a : m.alpha_y) wr_f64(os, a);
  for (double x : m.support_vectors.v) wr_f64(os, x);
}

SvmModel rd_svm(std::istream& is) {
  SvmModel m;
  m.kernel.g = rd_f64(is);
  m.cost.C = rd_f64(is);
  m.cost.r = rd_f64(is);
  m.bias = rd_f64(is);
  const std::int32_t rows = rd_i32(is);
  const std::int32_t cols = rd_i32(is);
  if (rows < 0 || cols < 0 || static_cast<std::int64_t>(rows) * cols > (1ll << 32))
    throw FormatError("model file: implausible SVM dimensions");
  m.alpha_y.resize(rows);
  for (double& a : m.alpha_y) a = rd_f64(is);
  m.support_vectors = Matrix(rows, cols);
  for (double& x : m.support_vectors.v) x = rd_f64(is);
  return m;
}

}  // namespace

void save_model(const PipelineModel& model, const fs::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("save_model: cannot open '" + path.string() + "'");

  wr_bytes(os, kMagic, 4);
  wr_u32(os, kVersion);

  wr_f64(os, model.sigma);
  wr_i32(os, model.contour_levels);
  wr_u8(os, model.special_prep ? 1 : 0);
  wr_u8(os, model.tap == FeatureTap::AllPools ? 1 : 0);

  wr_i32(os, model.net.plan.input_h);
  wr_i32(os, model.net.plan.input_w);
  wr_u32(os, static_cast<std::uint32_t>(model.net.plan.layers.size()));
  for (const LayerDesc& d : model.net.plan.layers) {
    wr_u8(os, d.kind == LayerKind::Conv ? 0 : 1);
    wr_i32(os, d.filters);
  }

  wr_u64(os, model.net.seed);
  wr_u32(os, static_cast<std::uint32_t>(model.net.conv.size()));
  for (const ConvLayer& c : model.net.conv) {
    wr_i32(os, c.in_c);
    wr_i32(os, c.out_c);
    wr_f64v(os, c.w);
    wr_f64v(os, c.b);
  }

  wr_mask(os, model.mask_presence);
  wr_mask(os, model.mask_severity);
  wr_svm(os, model.svm_presence);
  wr_svm(os, model.svm_severity);

  if (!os) throw FormatError("save_model: write failed for '" + path.string() + "'");
}

PipelineModel load_model(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("load_model: cannot open '" + path.string() + "'");

  char magic[4];
  if (!is.read(magic, 4) || !std::equal(magic, magic + 4, kMagic))
    throw FormatError("load_model: not a model file");
  const std::uint32_t version = rd_u32(is);
  if (version != kVersion)
    throw FormatError("load_model: unsupported format version " + std::to_string(version));

  PipelineModel m;
  m.sigma = rd_f64(is);
  m.contour_levels = rd_i32(is);
  m.special_prep = rd_u8(is) != 0;
  m.tap = rd_u8(is) != 0 ? FeatureTap::AllPools : FeatureTap::FinalPool;

  m.net.plan.input_h = rd_i32(is);
  m.net.plan.input_w = rd_i32(is);
  const std::uint32_t n_layers = rd_u32(is);
  if (n_layers > 1024) throw FormatError("model file: implausible layer count");
  m.net.plan.layers.resize(n_layers);
  for (LayerDesc& d : m.net.plan.layers) {
    const std::uint8_t kind = rd_u8(is);
    if (kind > 1) throw FormatError("model file: unknown layer kind");
    d.kind = kind == 0 ? LayerKind::Conv : LayerKind::MaxPool;
    d.filters = rd_i32(is);
  }

  m.net.seed = rd_u64(is);
  const std::uint32_t n_conv = rd_u32(is);
  if (n_conv > n_layers) throw FormatError("model file: conv layer count mismatch");
  m.net.conv.resize(n_conv);
  for (ConvLayer& c : m.net.conv) {
    c.in_c = rd_i32(is);
    c.out_c = rd_i32(is);
    if (c.in_c < 1 || c.out_c < 1) throw FormatError("model file: bad conv dimensions");
    c.w = rd_f64v(is, 1ull << 32);
    c.b = rd_f64v(is, 1ull << 32);
    if (c.w.size() != static_cast<std::size_t>(c.out_c) * c.in_c * 9 ||
        c.b.size() != static_cast<std::size_t>(c.out_c))
      throw FormatError("model file: conv weight shape mismatch");
  }

  m.mask_presence = rd_mask(is);
  m.mask_severity = rd_mask(is);
  m.svm_presence = rd_svm(is);
  m.svm_severity = rd_svm(is);

  if (is.peek() != std::ifstream::traits_type::eof())
    throw FormatError("load_model: trailing bytes");

  // Cross-checks: the pieces must agree with the plan.
  int dim = 0;
  try {
    dim = feature_dim(m.net.plan, m.tap);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("model file: bad layer plan — ") + e.what());
  }
  if (static_cast<int>(m.mask_presence.selected.size()) != dim ||
      static_cast<int>(m.mask_severity.selected.size()) != dim)
    throw FormatError("model file: mask dimension does not match the plan");
  if (m.svm_presence.support_vectors.cols != m.mask_presence.count() ||
      m.svm_severity.support_vectors.cols != m.mask_severity.count())
    throw FormatError("model file: SVM dimension does not match its mask");

  return m;
}

}  // namespace neoscan
