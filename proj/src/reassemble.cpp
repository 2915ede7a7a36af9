#include "dsfusion/reassemble.hpp"

namespace dsfusion {

BranchReassembleImpl::BranchReassembleImpl(const EncoderConfig& encoder, int64_t channels,
                                           Branch branch)
    : encoder_(encoder), channels_(channels), branch_(branch) {
  TORCH_CHECK(encoder_.image_size % 32 == 0, "reassemble: image_size must be divisible by 32");
  const int64_t grid = encoder_.grid_size();
  for (int i = 0; i < 4; ++i) {
    project_[i] = register_module(
        "project_" + std::to_string(i),
        torch::nn::Conv2d(torch::nn::Conv2dOptions(encoder_.embed_dim, channels_, 1)));
    const int64_t target = encoder_.image_size / (4LL << i);
    if (target > grid) {
      const int64_t factor = target / grid;
      TORCH_CHECK(factor * grid == target, "reassemble: non-integer upsample factor");
      resample_[i] = torch::nn::AnyModule(torch::nn::ConvTranspose2d(
          torch::nn::ConvTranspose2dOptions(channels_, channels_, factor).stride(factor)));
      register_module("resample_" + std::to_string(i), resample_[i].ptr());
    } else if (target < grid) {
      const int64_t factor = grid / target;
      TORCH_CHECK(factor * target == grid, "reassemble: non-integer downsample factor");
      resample_[i] = torch::nn::AnyModule(torch::nn::Conv2d(
          torch::nn::Conv2dOptions(channels_, channels_, 3).stride(factor).padding(1)));
      register_module("resample_" + std::to_string(i), resample_[i].ptr());
    }
    // target == grid: identity, no module.
  }
}

FeaturePyramid BranchReassembleImpl::forward(const LayerTokens& tokens) {
  TORCH_CHECK(tokens.grid_h == encoder_.grid_size() && tokens.grid_w == encoder_.grid_size(),
              "reassemble: token grid ", tokens.grid_h, "x", tokens.grid_w,
              " does not match configured grid ", encoder_.grid_size());
  FeaturePyramid pyramid;
  pyramid.branch = branch_;
  for (int i = 0; i < 4; ++i) {
    const auto& t = tokens.taps[i];
    TORCH_CHECK(t.defined() && t.dim() == 3 && t.size(1) == tokens.grid_h * tokens.grid_w &&
                    t.size(2) == encoder_.embed_dim,
                "reassemble: tap ", i, " has unexpected shape");
    auto x = t.transpose(1, 2).reshape({t.size(0), encoder_.embed_dim, tokens.grid_h,
                                        tokens.grid_w});
    x = project_[i]->forward(x);
    if (!resample_[i].is_empty()) x = resample_[i].forward(x);
    pyramid.levels[i] = x;
  }
  return pyramid;
}

ReassembleImpl::ReassembleImpl(const EncoderConfig& encoder, int64_t channels) {
  depth_ = register_module("depth", BranchReassemble(encoder, channels, Branch::kDepth));
  seg_ = register_module("seg", BranchReassemble(encoder, channels, Branch::kSegmentation));
}

std::pair<FeaturePyramid, FeaturePyramid> ReassembleImpl::forward(const LayerTokens& tokens) {
  return {depth_->forward(tokens), seg_->forward(tokens)};
}

}  // namespace dsfusion
