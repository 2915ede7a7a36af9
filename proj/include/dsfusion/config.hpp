#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dsfusion {

struct EncoderConfig {
  int64_t image_size = 96;   // paper scale: 384
  int64_t patch_size = 8;    // paper scale: 16
  int64_t embed_dim = 64;
  int64_t num_blocks = 12;
  int64_t num_heads = 4;
  int64_t mlp_ratio = 4;
  std::array<int64_t, 4> tap_layers{3, 6, 9, 12};  // 1-based block indices

  int64_t grid_size() const { return image_size / patch_size; }
  int64_t num_patches() const { return grid_size() * grid_size(); }

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

struct FusionConfig {
  bool enabled = true;     // false drops the cross-task exchange entirely
  int64_t reduction = 4;   // channel-MLP bottleneck ratio
};

struct DecoderConfig {
  int64_t num_iterations = 3;
  int64_t num_classes = 2;  // background, object

  void validate() const;
};

struct ModelConfig {
  EncoderConfig encoder;
  int64_t channels = 64;  // shared pyramid width C
  FusionConfig fusion;
  DecoderConfig decoder;

  void validate() const;
};

struct LossConfig {
  double w_d = 1.0;
  double w_g = 1.0;
  double w_n = 1.0;
  double alpha = 1.0;
  double beta = 0.1;
  bool iteration_ramp = true;  // per-iteration weight n/N

  void validate() const;
};

struct TrainConfig {
  double learning_rate = 1e-5;
  double adam_beta1 = 0.9;  // the paper states only the learning rate;
  double adam_beta2 = 0.999;  // moment defaults are recorded here
  int64_t batch_size = 4;
  int64_t epochs = 20;
  uint64_t seed = 0;
  int64_t log_interval = 1;
  bool deterministic = true;  // single-threaded, bitwise-reproducible runs
  std::string data_dir;
  std::string checkpoint_dir = "runs/default";
  ModelConfig model;
  LossConfig loss;

  void validate() const;
};

/// Flat key-value config file: one `key = value` per line, `#` comments.
/// Unknown keys are rejected so typos fail loudly.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Applies `key=value` pairs on top of `cfg`.  Used both for config files
/// and for CLI overrides; CLI wins because it is applied last.
void apply_options(TrainConfig& cfg, const std::map<std::string, std::string>& options);

/// Full round trip of the schema, used for checkpoint config snapshots.
std::map<std::string, std::string> to_options(const TrainConfig& cfg);

TrainConfig load_train_config(const std::string& config_path,
                              const std::vector<std::string>& overrides);

}  // namespace dsfusion
