#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsfusion/config.hpp"
#include "dsfusion/data.hpp"
#include "dsfusion/metrics.hpp"
#include "dsfusion/plot.hpp"
#include "dsfusion/trainer.hpp"

namespace fs = std::filesystem;

namespace {

int run_gen_data(const std::string& out_dir, int64_t count, uint64_t seed, int64_t image_size) {
  dsfusion::SceneConfig scene;
  scene.image_size = image_size;
  dsfusion::generate_dataset(out_dir, seed, count, scene);
  std::cout << "wrote " << count << " samples to " << out_dir << "\n";
  return 0;
}

int run_train(const std::string& config_path, const std::vector<std::string>& overrides,
              const std::string& resume) {
  auto cfg = dsfusion::load_train_config(config_path, overrides);
  if (cfg.data_dir.empty())
    throw std::runtime_error("train: data_dir must be set (config file or --override data_dir=...)");
  const auto dataset = dsfusion::load_dataset(cfg.data_dir, cfg.model.encoder.image_size);

  auto trainer = resume.empty() ? dsfusion::Trainer(cfg) : dsfusion::Trainer::load(resume);
  fs::create_directories(trainer.config().checkpoint_dir);
  const auto log_path = fs::path(trainer.config().checkpoint_dir) / "train_log.jsonl";
  std::ofstream log(log_path, resume.empty() ? std::ios::trunc : std::ios::app);
  if (!log) throw std::runtime_error("train: cannot open log file " + log_path.string());

  trainer.fit(dataset, &log);
  std::cout << "trained " << trainer.epochs_done() << " epochs (" << trainer.global_step()
            << " steps); checkpoint: "
            << (fs::path(trainer.config().checkpoint_dir) / "ckpt_last.pt").string() << "\n";
  return 0;
}

int run_eval(const std::string& ckpt, const std::string& data_dir, const std::string& out_path,
             bool oracle) {
  auto trainer = dsfusion::Trainer::load(ckpt);
  const auto dataset =
      dsfusion::load_dataset(data_dir, trainer.config().model.encoder.image_size);
  const auto report = dsfusion::evaluate(trainer.model(), dataset, oracle);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("eval: cannot write " + out_path);
  out << report.to_json();
  std::cout << report.to_json();
  return 0;
}

int run_predict(const std::string& ckpt, const std::string& image, const std::string& out_dir,
                bool viz) {
  auto trainer = dsfusion::Trainer::load(ckpt);
  dsfusion::predict_files(trainer.model(), image, out_dir, viz);
  std::cout << "wrote predictions to " << out_dir << "\n";
  return 0;
}

int run_plot(const std::string& in_path, const std::string& out_dir) {
  dsfusion::plot::plot_file(in_path, out_dir);
  std::cout << "wrote plots to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dsfusion: joint depth estimation and segmentation with iterative cross-task fusion"};
  app.require_subcommand(1);

  std::string out_dir, config_path, resume, ckpt, data_dir, out_path, image, in_path;
  std::vector<std::string> overrides;
  int64_t count = 0, image_size = 96;
  uint64_t seed = 0;
  bool oracle = false, viz = false;

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  gen->add_option("--out", out_dir, "output dataset directory")->required();
  gen->add_option("--count", count, "number of samples")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "first sample seed");
  gen->add_option("--image-size", image_size, "square image size in pixels");

  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--config", config_path, "flat key=value config file");
  train->add_option("--override", overrides, "config overrides, key=value (repeatable)");
  train->add_option("--resume", resume, "checkpoint to resume from");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval->add_option("--ckpt", ckpt, "checkpoint file")->required();
  eval->add_option("--data", data_dir, "dataset directory")->required();
  eval->add_option("--out", out_path, "metrics report JSON path")->required();
  eval->add_flag("--oracle", oracle, "feed ground truth as the prediction (self-test)");

  auto* predict = app.add_subcommand("predict", "run a checkpoint on one image");
  predict->add_option("--ckpt", ckpt, "checkpoint file")->required();
  predict->add_option("--image", image, "input image (PNG)")->required();
  predict->add_option("--out", out_dir, "output directory")->required();
  predict->add_flag("--viz", viz, "also write a color-mapped visualization");

  auto* plot = app.add_subcommand("plot", "plot a training log or report set");
  plot->add_option("--in", in_path, "JSONL training log or JSON report array")->required();
  plot->add_option("--out", out_dir, "output directory for figures")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_gen_data(out_dir, count, seed, image_size);
    if (train->parsed()) return run_train(config_path, overrides, resume);
    if (eval->parsed()) return run_eval(ckpt, data_dir, out_path, oracle);
    if (predict->parsed()) return run_predict(ckpt, image, out_dir, viz);
    if (plot->parsed()) return run_plot(in_path, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
