#pragma once

#include "dsfusion/common.hpp"
#include "dsfusion/config.hpp"

namespace dsfusion {

/// Turns the four token taps into one four-level pyramid for a single
/// branch.  Per level: 1x1 projection to the shared width C, then a
/// resampling step from the uniform token grid (1/patch of the input) to
/// the target scale (1/4, 1/8, 1/16, 1/32) — transposed convolution when
/// upscaling, strided 3x3 convolution when downscaling.
class BranchReassembleImpl : public torch::nn::Module {
 public:
  BranchReassembleImpl(const EncoderConfig& encoder, int64_t channels, Branch branch);

  FeaturePyramid forward(const LayerTokens& tokens);

 private:
  EncoderConfig encoder_;
  int64_t channels_;
  Branch branch_;
  std::array<torch::nn::Conv2d, 4> project_{nullptr, nullptr, nullptr, nullptr};
  std::array<torch::nn::AnyModule, 4> resample_;
};
TORCH_MODULE(BranchReassemble);

/// Branch-separate reassembly: the same tokens feed two independent
/// projection stacks, one per task.
class ReassembleImpl : public torch::nn::Module {
 public:
  ReassembleImpl(const EncoderConfig& encoder, int64_t channels);

  std::pair<FeaturePyramid, FeaturePyramid> forward(const LayerTokens& tokens);

  BranchReassemble depth_branch() { return depth_; }
  BranchReassemble seg_branch() { return seg_; }

 private:
  BranchReassemble depth_{nullptr};
  BranchReassemble seg_{nullptr};
};
TORCH_MODULE(Reassemble);

}  // namespace dsfusion
