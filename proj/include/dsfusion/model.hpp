#pragma once

#include <vector>

#include "dsfusion/common.hpp"
#include "dsfusion/config.hpp"
#include "dsfusion/decoder.hpp"
#include "dsfusion/encoder.hpp"
#include "dsfusion/reassemble.hpp"

namespace dsfusion {

/// End-to-end network: (S, D) = f(I).  Encode, reassemble into two
/// pyramids, then decode iteratively with cross-task fusion.
class ModelImpl : public torch::nn::Module {
 public:
  explicit ModelImpl(ModelConfig cfg);

  /// All N iteration states for a batch [B, 3, H, W].
  std::vector<IterationState> forward_states(const torch::Tensor& images);

  /// Final predictions: heads on the shallowest level after the last
  /// iteration, at full input resolution.
  Predictions forward(const torch::Tensor& images);

  /// Single-image convenience: [3, H, W] -> depth [H, W], logits [K, H, W].
  Predictions predict_one(const torch::Tensor& image);

  const ModelConfig& config() const { return cfg_; }
  VitEncoder encoder() { return encoder_; }
  Reassemble reassemble() { return reassemble_; }
  IterativeDecoder decoder() { return decoder_; }

  int64_t parameter_count() const;

 private:
  ModelConfig cfg_;
  VitEncoder encoder_{nullptr};
  Reassemble reassemble_{nullptr};
  IterativeDecoder decoder_{nullptr};
};
TORCH_MODULE(Model);

}  // namespace dsfusion
