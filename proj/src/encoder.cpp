#include "dsfusion/encoder.hpp"

#include <cmath>

namespace dsfusion {

PatchEmbedImpl::PatchEmbedImpl(const EncoderConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  proj_ = register_module(
      "proj", torch::nn::Conv2d(torch::nn::Conv2dOptions(3, cfg_.embed_dim, cfg_.patch_size)
                                    .stride(cfg_.patch_size)));
  pos_embedding_ = register_parameter(
      "pos_embedding", torch::randn({cfg_.num_patches(), cfg_.embed_dim}) * 0.02);
}

torch::Tensor PatchEmbedImpl::forward(const torch::Tensor& image) {
  TORCH_CHECK(image.dim() == 4 && image.size(1) == 3 && image.size(2) == cfg_.image_size &&
                  image.size(3) == cfg_.image_size,
              "patch_embed: expected [B, 3, ", cfg_.image_size, ", ", cfg_.image_size,
              "], got ", image.sizes());
  auto tokens = proj_->forward(image);          // [B, E, h, w]
  tokens = tokens.flatten(2).transpose(1, 2);   // [B, N, E], row-major patch order
  return tokens + pos_embedding_.unsqueeze(0);
}

SelfAttentionImpl::SelfAttentionImpl(int64_t dim, int64_t num_heads) : num_heads_(num_heads) {
  TORCH_CHECK(dim % num_heads == 0, "attention: dim must be divisible by num_heads");
  qkv_ = register_module("qkv", torch::nn::Linear(dim, 3 * dim));
  proj_ = register_module("proj", torch::nn::Linear(dim, dim));
}

std::pair<torch::Tensor, torch::Tensor> SelfAttentionImpl::forward_with_weights(
    const torch::Tensor& tokens) {
  const auto batch = tokens.size(0);
  const auto n = tokens.size(1);
  const auto dim = tokens.size(2);
  const auto head_dim = dim / num_heads_;

  auto qkv = qkv_->forward(tokens)
                 .reshape({batch, n, 3, num_heads_, head_dim})
                 .permute({2, 0, 3, 1, 4});  // [3, B, heads, N, head_dim]
  auto q = qkv[0], k = qkv[1], v = qkv[2];

  auto scores = torch::matmul(q, k.transpose(-2, -1)) / std::sqrt(static_cast<double>(head_dim));
  auto weights = torch::softmax(scores, -1);  // [B, heads, N, N]
  auto out = torch::matmul(weights, v)        // [B, heads, N, head_dim]
                 .transpose(1, 2)
                 .reshape({batch, n, dim});
  return {proj_->forward(out), weights};
}

torch::Tensor SelfAttentionImpl::forward(const torch::Tensor& tokens) {
  return forward_with_weights(tokens).first;
}

TransformerBlockImpl::TransformerBlockImpl(int64_t dim, int64_t num_heads, int64_t mlp_ratio) {
  norm1_ = register_module("norm1", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
  norm2_ = register_module("norm2", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
  attn_ = register_module("attn", SelfAttention(dim, num_heads));
  fc1_ = register_module("fc1", torch::nn::Linear(dim, mlp_ratio * dim));
  fc2_ = register_module("fc2", torch::nn::Linear(mlp_ratio * dim, dim));
}

torch::Tensor TransformerBlockImpl::forward(const torch::Tensor& tokens) {
  auto x = tokens + attn_->forward(norm1_->forward(tokens));
  x = x + fc2_->forward(torch::gelu(fc1_->forward(norm2_->forward(x))));
  return x;
}

VitEncoderImpl::VitEncoderImpl(EncoderConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  patch_embed_ = register_module("patch_embed", PatchEmbed(cfg_));
  for (int64_t i = 0; i < cfg_.num_blocks; ++i) {
    blocks_.push_back(register_module(
        "block_" + std::to_string(i + 1),
        TransformerBlock(cfg_.embed_dim, cfg_.num_heads, cfg_.mlp_ratio)));
  }
}

torch::Tensor VitEncoderImpl::patch_tokens(const torch::Tensor& image) {
  return patch_embed_->forward(image);
}

LayerTokens VitEncoderImpl::forward(const torch::Tensor& image) {
  LayerTokens out;
  out.grid_h = cfg_.grid_size();
  out.grid_w = cfg_.grid_size();

  auto x = patch_embed_->forward(image);
  size_t tap = 0;
  for (int64_t i = 1; i <= cfg_.num_blocks && tap < out.taps.size(); ++i) {
    x = blocks_[static_cast<size_t>(i - 1)]->forward(x);
    if (i == cfg_.tap_layers[tap]) out.taps[tap++] = x;
  }
  TORCH_CHECK(tap == out.taps.size(), "encoder: tap layers not all reached");
  return out;
}

}  // namespace dsfusion
