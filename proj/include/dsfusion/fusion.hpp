#pragma once

#include "dsfusion/common.hpp"
#include "dsfusion/config.hpp"

namespace dsfusion {

/// Channel attention: sigmoid(MLP(avgpool(F)) + MLP(maxpool(F))) with the
/// MLP shared across the two pooled paths and bottlenecked by `reduction`.
class ChannelAttentionImpl : public torch::nn::Module {
 public:
  ChannelAttentionImpl(int64_t channels, int64_t reduction);

  /// [B, C, H, W] -> [B, C, 1, 1], every weight strictly in (0, 1).
  torch::Tensor forward(const torch::Tensor& features);

 private:
  torch::nn::Linear fc1_{nullptr};
  torch::nn::Linear fc2_{nullptr};
};
TORCH_MODULE(ChannelAttention);

/// Spatial attention: sigmoid(conv7x7([channel-avg, channel-max])).
class SpatialAttentionImpl : public torch::nn::Module {
 public:
  SpatialAttentionImpl();

  /// [B, C, H, W] -> [B, 1, H, W], spatial size preserved (padding 3).
  torch::Tensor forward(const torch::Tensor& features);

 private:
  torch::nn::Conv2d conv_{nullptr};
};
TORCH_MODULE(SpatialAttention);

/// Semantic-geometric fusion for one pyramid level.  Each branch is gated
/// by channel attention computed from the other branch, then by spatial
/// attention computed from the other branch's intermediate:
///
///   F_d' = F_d * CAM_s(F_s)     F_s' = F_s * CAM_d(F_d)
///   F_d'' = F_d' * SAM_s(F_s')  F_s'' = F_s' * SAM_d(F_d')
///
/// The two attention stacks hold separate parameters; swapping the branch
/// arguments together with their stacks swaps the outputs exactly.
class SgfmImpl : public torch::nn::Module {
 public:
  SgfmImpl(int64_t channels, int64_t reduction);

  std::pair<torch::Tensor, torch::Tensor> forward(const torch::Tensor& f_depth,
                                                  const torch::Tensor& f_seg);

  ChannelAttention cam_depth() { return cam_depth_; }
  ChannelAttention cam_seg() { return cam_seg_; }
  SpatialAttention sam_depth() { return sam_depth_; }
  SpatialAttention sam_seg() { return sam_seg_; }

 private:
  ChannelAttention cam_depth_{nullptr};  // attention computed on depth features
  ChannelAttention cam_seg_{nullptr};    // attention computed on seg features
  SpatialAttention sam_depth_{nullptr};
  SpatialAttention sam_seg_{nullptr};
};
TORCH_MODULE(Sgfm);

}  // namespace dsfusion
