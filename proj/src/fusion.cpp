#include "dsfusion/fusion.hpp"

#include <algorithm>

namespace dsfusion {

ChannelAttentionImpl::ChannelAttentionImpl(int64_t channels, int64_t reduction) {
  TORCH_CHECK(channels > 0 && reduction > 0, "channel attention: bad sizes");
  const int64_t hidden = std::max<int64_t>(1, channels / reduction);
  fc1_ = register_module("fc1", torch::nn::Linear(channels, hidden));
  fc2_ = register_module("fc2", torch::nn::Linear(hidden, channels));
}

torch::Tensor ChannelAttentionImpl::forward(const torch::Tensor& features) {
  TORCH_CHECK(features.dim() == 4, "channel attention: expected [B, C, H, W]");
  auto avg = features.mean({2, 3});                // [B, C]
  auto max = std::get<0>(features.flatten(2).max(2));
  auto mlp = [this](const torch::Tensor& x) { return fc2_->forward(torch::relu(fc1_->forward(x))); };
  auto weights = torch::sigmoid(mlp(avg) + mlp(max));
  return weights.unsqueeze(-1).unsqueeze(-1);      // [B, C, 1, 1]
}

SpatialAttentionImpl::SpatialAttentionImpl() {
  conv_ = register_module(
      "conv", torch::nn::Conv2d(torch::nn::Conv2dOptions(2, 1, 7).padding(3)));
}

torch::Tensor SpatialAttentionImpl::forward(const torch::Tensor& features) {
  TORCH_CHECK(features.dim() == 4, "spatial attention: expected [B, C, H, W]");
  auto avg = features.mean(1, /*keepdim=*/true);
  auto max = std::get<0>(features.max(1, /*keepdim=*/true));
  return torch::sigmoid(conv_->forward(torch::cat({avg, max}, 1)));
}

SgfmImpl::SgfmImpl(int64_t channels, int64_t reduction) {
  cam_depth_ = register_module("cam_depth", ChannelAttention(channels, reduction));
  cam_seg_ = register_module("cam_seg", ChannelAttention(channels, reduction));
  sam_depth_ = register_module("sam_depth", SpatialAttention());
  sam_seg_ = register_module("sam_seg", SpatialAttention());
}

std::pair<torch::Tensor, torch::Tensor> SgfmImpl::forward(const torch::Tensor& f_depth,
                                                          const torch::Tensor& f_seg) {
  TORCH_CHECK(f_depth.sizes() == f_seg.sizes(),
              "sgfm: branch shapes differ: ", f_depth.sizes(), " vs ", f_seg.sizes());
  auto d1 = f_depth * cam_seg_->forward(f_seg);
  auto s1 = f_seg * cam_depth_->forward(f_depth);
  auto d2 = d1 * sam_seg_->forward(s1);
  auto s2 = s1 * sam_depth_->forward(d1);
  return {d2, s2};
}

}  // namespace dsfusion
