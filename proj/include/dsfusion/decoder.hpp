#pragma once

#include <optional>
#include <vector>

#include "dsfusion/common.hpp"
#include "dsfusion/config.hpp"
#include "dsfusion/fusion.hpp"

namespace dsfusion {

/// Carries features between iterations: per-level 1x1 convolution + ReLU.
class GatedUnitImpl : public torch::nn::Module {
 public:
  explicit GatedUnitImpl(int64_t channels);
  torch::Tensor forward(const torch::Tensor& features);

 private:
  torch::nn::Conv2d conv_{nullptr};
};
TORCH_MODULE(GatedUnit);

/// Residual refinement: x + conv(relu(conv(relu(x)))), two 3x3 convolutions.
class ResidualConvUnitImpl : public torch::nn::Module {
 public:
  explicit ResidualConvUnitImpl(int64_t channels);
  torch::Tensor forward(const torch::Tensor& features);

 private:
  torch::nn::Conv2d conv1_{nullptr};
  torch::nn::Conv2d conv2_{nullptr};
};
TORCH_MODULE(ResidualConvUnit);

/// Two task heads reading one feature level each: convolutions plus
/// bilinear interpolation to the output resolution.  The depth head ends
/// in ReLU (nonnegative depth); the segmentation head emits raw logits.
class PredictionHeadsImpl : public torch::nn::Module {
 public:
  PredictionHeadsImpl(int64_t channels, int64_t num_classes);

  Predictions forward(const torch::Tensor& depth_feature, const torch::Tensor& seg_feature,
                      int64_t out_h, int64_t out_w);

 private:
  torch::nn::Conv2d depth_conv1_{nullptr};
  torch::nn::Conv2d depth_conv2_{nullptr};
  torch::nn::Conv2d depth_out_{nullptr};
  torch::nn::Conv2d seg_conv1_{nullptr};
  torch::nn::Conv2d seg_conv2_{nullptr};
  torch::nn::Conv2d seg_out_{nullptr};
};
TORCH_MODULE(PredictionHeads);

/// Shared-weight iterative decoder.  One set of parameters is reused for
/// every iteration: reassembled features are combined with the gated
/// previous state, fused across branches per level, then refined coarse
/// to fine with 2x upsampling between levels.
class IterativeDecoderImpl : public torch::nn::Module {
 public:
  IterativeDecoderImpl(int64_t channels, const FusionConfig& fusion, const DecoderConfig& cfg);

  /// One refinement pass.  `prev` must be empty exactly for iteration 1.
  IterationState decode_once(const FeaturePyramid& depth_pyramid,
                             const FeaturePyramid& seg_pyramid,
                             const std::optional<IterationState>& prev);

  /// Runs cfg.num_iterations passes and keeps every state for
  /// per-iteration supervision.
  std::vector<IterationState> run_iterations(const FeaturePyramid& depth_pyramid,
                                             const FeaturePyramid& seg_pyramid);

  /// Heads applied to the shallowest (1/4) level of `state`.
  Predictions predict(const IterationState& state, int64_t out_h, int64_t out_w);

  /// Heads applied to an arbitrary level, for multi-scale supervision.
  Predictions predict_level(const IterationState& state, int level, int64_t out_h, int64_t out_w);

  const DecoderConfig& config() const { return cfg_; }
  bool fusion_enabled() const { return fusion_enabled_; }
  Sgfm fusion_level(int level) { return sgfm_[static_cast<size_t>(level)]; }

 private:
  DecoderConfig cfg_;
  bool fusion_enabled_ = true;
  std::array<Sgfm, 4> sgfm_{nullptr, nullptr, nullptr, nullptr};
  std::array<GatedUnit, 4> gate_depth_{nullptr, nullptr, nullptr, nullptr};
  std::array<GatedUnit, 4> gate_seg_{nullptr, nullptr, nullptr, nullptr};
  std::array<ResidualConvUnit, 4> refine_depth_{nullptr, nullptr, nullptr, nullptr};
  std::array<ResidualConvUnit, 4> refine_seg_{nullptr, nullptr, nullptr, nullptr};
  PredictionHeads heads_{nullptr};
};
TORCH_MODULE(IterativeDecoder);

}  // namespace dsfusion
