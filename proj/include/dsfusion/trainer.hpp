#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "dsfusion/config.hpp"
#include "dsfusion/data.hpp"
#include "dsfusion/losses.hpp"
#include "dsfusion/metrics.hpp"
#include "dsfusion/model.hpp"

namespace dsfusion {

inline constexpr int64_t kCheckpointVersion = 1;

struct StepStats {
  double total = 0;
  double geometric = 0;
  double semantic = 0;
  std::vector<double> per_iteration;
};

/// Owns the model and Adam optimizer; drives seeded, reproducible
/// training with per-epoch checkpoints and JSONL step logs.
class Trainer {
 public:
  explicit Trainer(const TrainConfig& cfg);

  /// Rebuilds model + optimizer state from a checkpoint written by
  /// save().  Rejects unknown format versions.
  static Trainer load(const std::string& checkpoint_path);

  /// Runs the remaining epochs (resume-aware).  Writes `ckpt_last.pt`
  /// under cfg.checkpoint_dir after every epoch; appends one JSON object
  /// per logged step to `log` when given.
  void fit(const std::vector<ImageSample>& dataset, std::ostream* log = nullptr);

  /// One optimization step on an explicit batch.
  StepStats step(const torch::Tensor& rgb, const torch::Tensor& depth, const torch::Tensor& seg);

  void save(const std::string& path) const;

  Model model() { return model_; }
  const TrainConfig& config() const { return cfg_; }
  int64_t epochs_done() const { return epochs_done_; }
  int64_t global_step() const { return global_step_; }

 private:
  TrainConfig cfg_;
  Model model_{nullptr};
  std::unique_ptr<torch::optim::Adam> optimizer_;
  int64_t epochs_done_ = 0;
  int64_t global_step_ = 0;
};

/// Per-image metrics averaged uniformly over the dataset.  With
/// `oracle_mode` the ground truth is fed back as the prediction — a
/// harness self-test that must score perfectly.
MetricsReport evaluate(Model model, const std::vector<ImageSample>& dataset,
                       bool oracle_mode = false);

/// Runs one image through the model and writes depth.png (16-bit),
/// mask.png (paletted) and meta.json in the dataset formats; optionally a
/// color-mapped visualization.
void predict_files(Model model, const std::string& image_path, const std::string& out_dir,
                   bool visualization);

}  // namespace dsfusion
