// neoscan: two-stage MRI neoplasm classification pipeline.
//
// Subcommands: prep, train, tune, predict, evaluate. Datasets are
// directories with normal/, benign/ and malignant/ subdirectories holding
// 8-bit grayscale PGM or PNG slices.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "neoscan/edgeprep.hpp"
#include "neoscan/eval.hpp"
#include "neoscan/image_io.hpp"
#include "neoscan/imgcore.hpp"
#include "neoscan/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace neoscan;

namespace {

struct CommonOpts {
  std::string data;
  std::string model = "neoscan.model";
  std::string out = ".";
  std::uint64_t seed = 0;
  double sigma = 1.0;
  int contour_levels = 8;
  bool no_special_prep = false;
  double cost_ratio = 4.0;
  double split_ratio = 0.8;
  std::string features = "final";
  std::string plan = "standard";
  int epochs = 50;
  double lambda_frac = 0.01;
  double C = 0.0;  // 0 = per-stage defaults
  double g = 0.0;
};

PipelineConfig make_config(const CommonOpts& o) {
  PipelineConfig cfg;
  cfg.sigma = o.sigma;
  cfg.contour_levels = o.contour_levels;
  cfg.special_prep = !o.no_special_prep;
  cfg.tap = o.features == "all-pools" ? FeatureTap::AllPools : FeatureTap::FinalPool;
  cfg.plan = o.plan == "small" ? small_extractor_plan() : mri_extractor_plan();
  cfg.train.epochs = o.epochs;
  cfg.lambda_frac = o.lambda_frac;
  cfg.cost_ratio = o.cost_ratio;
  cfg.seed = o.seed;
  if (o.C > 0.0) cfg.presence_C = cfg.severity_C = o.C;
  if (o.g > 0.0) cfg.presence_g = cfg.severity_g = o.g;
  return cfg;
}

json metrics_json(const ConfusionMatrix& cm, const Metrics& m) {
  return json{{"tp", cm.tp},           {"fp", cm.fp},
              {"tn", cm.tn},           {"fn", cm.fn},
              {"accuracy", m.accuracy}, {"precision", m.precision},
              {"recall", m.recall},     {"f1", m.f1}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  os << text;
}

void write_report(const fs::path& out_dir, const EvaluationReport& r) {
  json j;
  j["presence"] = metrics_json(r.presence, r.presence_metrics);
  if (r.severity_valid) j["severity"] = metrics_json(r.severity, r.severity_metrics);
  write_text(out_dir / "metrics.json", j.dump(2) + "\n");

  std::string csv = "stage,tp,fp,tn,fn\n";
  csv += "presence," + std::to_string(r.presence.tp) + "," + std::to_string(r.presence.fp) +
         "," + std::to_string(r.presence.tn) + "," + std::to_string(r.presence.fn) + "\n";
  if (r.severity_valid)
    csv += "severity," + std::to_string(r.severity.tp) + "," + std::to_string(r.severity.fp) +
           "," + std::to_string(r.severity.tn) + "," + std::to_string(r.severity.fn) + "\n";
  write_text(out_dir / "confusion.csv", csv);
}

void run_prep(const CommonOpts& o, const std::string& out_dir, bool emit_contours, int size) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(o.data)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".pgm" || ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  for (const fs::path& file : files) {
    const fs::path rel = fs::relative(file, o.data);
    const fs::path dst = fs::path(out_dir) / rel;
    fs::create_directories(dst.parent_path());

    GrayImage img = basic_preprocess(read_image(file), size, size, o.sigma);
    if (!o.no_special_prep) img = special_preprocess(img, o.contour_levels);
    write_image(img, dst);

    if (emit_contours) {
      fs::path cpath = dst;
      cpath.replace_extension(".contours.pgm");
      write_pgm(render_contour(contour(img, o.contour_levels)), cpath);
    }
  }
  std::cout << "processed " << files.size() << " images into " << out_dir << "\n";
}

void run_train(const CommonOpts& o) {
  const auto samples = ingest(o.data);
  auto [train_set, test_set] = split(samples, o.split_ratio, o.seed);
  std::cout << "train " << train_set.size() << " / test " << test_set.size() << " samples\n";

  const PipelineConfig cfg = make_config(o);
  TrainCurve curve;
  const PipelineModel model = fit(train_set, cfg, &curve);
  save_model(model, o.model);
  std::cout << "model written to " << o.model << "\n";

  std::string csv = "epoch,loss,accuracy\n";
  for (std::size_t e = 0; e < curve.loss.size(); ++e)
    csv += std::to_string(e + 1) + "," + std::to_string(curve.loss[e]) + "," +
           std::to_string(curve.accuracy[e]) + "\n";
  write_text(fs::path(o.out) / "training_curve.csv", csv);

  const EvaluationReport report = evaluate(model, test_set);
  write_report(o.out, report);
  std::cout << "held-out presence accuracy " << report.presence_metrics.accuracy
            << ", recall " << report.presence_metrics.recall << "\n";
}

void run_tune(const CommonOpts& o, const std::string& stage, int folds,
              std::vector<double> C_grid, std::vector<double> g_grid) {
  const auto samples = ingest(o.data);
  const PipelineConfig cfg = make_config(o);

  // The grid tunes the SVM, so train the extractor once and reuse it.
  std::vector<Sample> subset;
  std::vector<int> y;
  PipelineModel model = fit(samples, cfg);
  for (const Sample& s : samples) {
    if (stage == "severity" && s.label == ClassLabel::Normal) continue;
    subset.push_back(s);
    if (stage == "severity")
      y.push_back(s.label == ClassLabel::Malignant ? 1 : -1);
    else
      y.push_back(s.label == ClassLabel::Normal ? -1 : 1);
  }

  Matrix F(static_cast<int>(subset.size()),
           stage == "severity" ? model.mask_severity.count() : model.mask_presence.count());
  for (std::size_t i = 0; i < subset.size(); ++i) {
    const GrayImage p = preprocess_for_model(subset[i].image, model.net.plan, model.sigma,
                                             model.contour_levels, model.special_prep);
    const auto f = extract(model.net, p, model.tap);
    const auto masked =
        apply_mask(f, stage == "severity" ? model.mask_severity : model.mask_presence);
    std::copy(masked.begin(), masked.end(), F.row(static_cast<int>(i)).begin());
  }

  GridSpec grid;
  if (!C_grid.empty()) grid.C_values = std::move(C_grid);
  if (!g_grid.empty()) grid.g_values = std::move(g_grid);
  grid.folds = folds;

  const GridResult result = grid_search(F, y, grid, o.cost_ratio, o.seed);

  std::string csv = "C,g,mean_recall,mean_accuracy\n";
  for (const GridCell& c : result.cells)
    csv += std::to_string(c.C) + "," + std::to_string(c.g) + "," +
           std::to_string(c.mean_recall) + "," + std::to_string(c.mean_accuracy) + "\n";
  csv += "chosen," + std::to_string(result.C) + "," + std::to_string(result.g) + "\n";

  write_text(fs::path(o.out) / "tune.csv", csv);
  std::cout << csv;
}

void run_predict(const CommonOpts& o, const std::vector<std::string>& images) {
  const PipelineModel model = load_model(o.model);
  json out = json::array();
  for (const std::string& path : images) {
    const PipelinePrediction p = predict(model, read_image(path));
    json j{{"image", path},
           {"label", to_string(p.label)},
           {"presence_score", p.presence_score}};
    if (p.severity_evaluated)
      j["severity_score"] = p.severity_score;
    else
      j["severity_score"] = nullptr;
    out.push_back(std::move(j));
  }
  std::cout << out.dump(2) << "\n";
}

void run_evaluate(const CommonOpts& o) {
  const PipelineModel model = load_model(o.model);
  const auto samples = ingest(o.data);
  const EvaluationReport report = evaluate(model, samples);
  write_report(o.out, report);

  json j;
  j["presence"] = metrics_json(report.presence, report.presence_metrics);
  if (report.severity_valid)
    j["severity"] = metrics_json(report.severity, report.severity_metrics);
  std::cout << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-stage MRI neoplasm classifier"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string prep_out = "prepped";
  bool emit_contours = false;
  int prep_size = 150;
  std::string tune_stage = "presence";
  int tune_folds = 10;
  std::vector<double> C_grid, g_grid;
  std::vector<std::string> predict_images;

  auto add_prep_opts = [&](CLI::App* cmd) {
    cmd->add_option("--sigma", o.sigma, "Gaussian blur sigma")->check(CLI::PositiveNumber);
    cmd->add_option("--contour-levels", o.contour_levels, "contour quantization levels")
        ->check(CLI::Range(2, 256));
    cmd->add_flag("--no-special-prep", o.no_special_prep,
                  "skip the edge-difference preprocessing");
  };
  auto add_fit_opts = [&](CLI::App* cmd) {
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--cost-ratio", o.cost_ratio, "false-negative cost multiplier r")
        ->check(CLI::Range(1.0, 1e9));
    cmd->add_option("--features", o.features, "feature tap")
        ->check(CLI::IsMember({"final", "all-pools"}));
    cmd->add_option("--plan", o.plan, "extractor size")
        ->check(CLI::IsMember({"standard", "small"}));
    cmd->add_option("--epochs", o.epochs, "extractor training epochs")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--lambda-frac", o.lambda_frac, "LASSO lambda as a fraction of lambda_max")
        ->check(CLI::Range(0.0, 1.0));
  };

  CLI::App* prep = app.add_subcommand("prep", "preprocess a directory of images");
  prep->add_option("--data", o.data, "input image directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  prep->add_option("--out", prep_out, "output directory")->required();
  prep->add_option("--resize", prep_size, "working image size")->check(CLI::PositiveNumber);
  prep->add_flag("--emit-contours", emit_contours, "also write contour maps as PGM");
  add_prep_opts(prep);

  CLI::App* train_cmd = app.add_subcommand("train", "train the full pipeline");
  train_cmd->add_option("--data", o.data, "dataset root (normal/benign/malignant)")
      ->required()
      ->check(CLI::ExistingDirectory);
  train_cmd->add_option("--model", o.model, "output model file");
  train_cmd->add_option("--out", o.out, "report directory")->check(CLI::ExistingDirectory);
  train_cmd->add_option("--split", o.split_ratio, "train fraction")
      ->check(CLI::Range(0.01, 0.99));
  train_cmd->add_option("--C", o.C, "SVM C for both stages (default 13/9)");
  train_cmd->add_option("--g", o.g, "RBF g for both stages (default 2/3)");
  add_prep_opts(train_cmd);
  add_fit_opts(train_cmd);

  CLI::App* tune_cmd = app.add_subcommand("tune", "grid-search SVM (C, g) by k-fold CV");
  tune_cmd->add_option("--data", o.data, "dataset root")
      ->required()
      ->check(CLI::ExistingDirectory);
  tune_cmd->add_option("--out", o.out, "report directory")->check(CLI::ExistingDirectory);
  tune_cmd->add_option("--stage", tune_stage, "which stage to tune")
      ->check(CLI::IsMember({"presence", "severity"}));
  tune_cmd->add_option("--folds", tune_folds, "CV folds")->check(CLI::Range(2, 1000));
  tune_cmd->add_option("--C-grid", C_grid, "C values to sweep")->delimiter(',');
  tune_cmd->add_option("--g-grid", g_grid, "g values to sweep")->delimiter(',');
  add_prep_opts(tune_cmd);
  add_fit_opts(tune_cmd);

  CLI::App* predict_cmd = app.add_subcommand("predict", "classify images with a saved model");
  predict_cmd->add_option("--model", o.model, "model file")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("images", predict_images, "image files")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "score a saved model on a dataset");
  evaluate_cmd->add_option("--model", o.model, "model file")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--data", o.data, "dataset root")
      ->required()
      ->check(CLI::ExistingDirectory);
  evaluate_cmd->add_option("--out", o.out, "report directory")->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (prep->parsed()) run_prep(o, prep_out, emit_contours, prep_size);
    if (train_cmd->parsed()) run_train(o);
    if (tune_cmd->parsed()) run_tune(o, tune_stage, tune_folds, C_grid, g_grid);
    if (predict_cmd->parsed()) run_predict(o, predict_images);
    if (evaluate_cmd->parsed()) run_evaluate(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
