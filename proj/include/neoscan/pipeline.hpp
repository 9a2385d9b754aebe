#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "neoscan/convnet.hpp"
#include "neoscan/eval.hpp"
#include "neoscan/featsel.hpp"
#include "neoscan/image.hpp"
#include "neoscan/svm.hpp"

namespace neoscan {

enum class ClassLabel { Normal, Benign, Malignant };

std::string to_string(ClassLabel label);

struct Sample {
  GrayImage image;
  ClassLabel label = ClassLabel::Normal;
  std::string id;  // source filename
};

struct PipelineConfig {
  double sigma = 1.0;
  int contour_levels = 8;
  bool special_prep = true;
  FeatureTap tap = FeatureTap::FinalPool;
  LayerPlan plan = mri_extractor_plan();
  TrainConfig train;        // extractor training; its seed field is ignored
  double lambda_frac = 0.01;  // lambda = lambda_frac * lambda_max per stage
  double presence_C = 13.0, presence_g = 2.0;
  double severity_C = 9.0, severity_g = 3.0;
  double cost_ratio = 4.0;
  double svm_tol = 1e-3;
  long svm_max_passes = 10000;
  std::uint64_t seed = 0;  // drives extractor init and head training
};

struct PipelineModel {
  ConvNet net;
  FeatureTap tap = FeatureTap::FinalPool;
  double sigma = 1.0;
  int contour_levels = 8;
  bool special_prep = true;
  FeatureMask mask_presence, mask_severity;
  SvmModel svm_presence, svm_severity;
};

// Loads every .pgm/.png under root/normal, root/benign, root/malignant,
// labeled by directory, sorted by directory then filename. Unreadable files
// are reported together in one FormatError; an absent or empty class
// directory raises invalid_argument naming the stage it starves.
std::vector<Sample> ingest(const std::filesystem::path& root);

// Stratified train/test split; the train side takes floor(ratio * n) of
// each class, clamped so both sides keep at least one sample.
std::pair<std::vector<Sample>, std::vector<Sample>> split(const std::vector<Sample>& samples,
                                                          double ratio, std::uint64_t seed);

// resize -> Gaussian blur -> histogram equalization
GrayImage basic_preprocess(const GrayImage& img, int out_w, int out_h, double sigma);

// Everything predict applies before feature extraction: basic preprocessing
// to the model's input size plus the edge-difference step when enabled.
GrayImage preprocess_for_model(const GrayImage& img, const LayerPlan& plan, double sigma,
                               int contour_levels, bool special_prep);

// Full training run: preprocess, train the extractor on presence labels,
// select features and train one cost-sensitive SVM per stage
// (presence: neoplasm vs normal; severity: malignant vs benign).
PipelineModel fit(const std::vector<Sample>& train_set, const PipelineConfig& cfg,
                  TrainCurve* curve = nullptr);

struct PipelinePrediction {
  ClassLabel label = ClassLabel::Normal;
  double presence_score = 0.0;
  double severity_score = 0.0;
  bool severity_evaluated = false;  // false when stage 1 said normal
};

PipelinePrediction predict(const PipelineModel& model, const GrayImage& img);

struct EvaluationReport {
  ConfusionMatrix presence;  // positive class: neoplasm present
  ConfusionMatrix severity;  // positive class: malignant; true neoplasms only
  Metrics presence_metrics, severity_metrics;
  bool severity_valid = false;  // test set contained neoplasm samples
};

// Stage-2 counts are routed by ground truth, so they measure the severity
// classifier alone rather than compounding stage-1 mistakes.
EvaluationReport evaluate(const PipelineModel& model, const std::vector<Sample>& test);

// Versioned little-endian binary bundle of the extractor, masks, SVMs and
// preprocessing settings. load throws FormatError on anything malformed.
void save_model(const PipelineModel& model, const std::filesystem::path& path);
PipelineModel load_model(const std::filesystem::path& path);

}  // namespace neoscan
