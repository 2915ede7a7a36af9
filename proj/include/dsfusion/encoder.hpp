#pragma once

#include "dsfusion/common.hpp"
#include "dsfusion/config.hpp"

namespace dsfusion {

/// Non-overlapping patch projection plus learned position embeddings.
class PatchEmbedImpl : public torch::nn::Module {
 public:
  explicit PatchEmbedImpl(const EncoderConfig& cfg);

  /// [B, 3, H, W] -> [B, num_patches, embed_dim], H = W = cfg.image_size.
  torch::Tensor forward(const torch::Tensor& image);

  torch::Tensor position_embedding() { return pos_embedding_; }

 private:
  EncoderConfig cfg_;
  torch::nn::Conv2d proj_{nullptr};
  torch::Tensor pos_embedding_;
};
TORCH_MODULE(PatchEmbed);

class SelfAttentionImpl : public torch::nn::Module {
 public:
  SelfAttentionImpl(int64_t dim, int64_t num_heads);

  torch::Tensor forward(const torch::Tensor& tokens);

  /// Also returns the softmaxed attention map [B, heads, N, N]; rows are
  /// convex combinations (each sums to 1).
  std::pair<torch::Tensor, torch::Tensor> forward_with_weights(const torch::Tensor& tokens);

 private:
  int64_t num_heads_;
  torch::nn::Linear qkv_{nullptr};
  torch::nn::Linear proj_{nullptr};
};
TORCH_MODULE(SelfAttention);

/// Pre-norm transformer block: LN -> MHSA -> residual, LN -> MLP -> residual.
class TransformerBlockImpl : public torch::nn::Module {
 public:
  TransformerBlockImpl(int64_t dim, int64_t num_heads, int64_t mlp_ratio);

  torch::Tensor forward(const torch::Tensor& tokens);

  SelfAttention attention() { return attn_; }

 private:
  torch::nn::LayerNorm norm1_{nullptr};
  torch::nn::LayerNorm norm2_{nullptr};
  SelfAttention attn_{nullptr};
  torch::nn::Linear fc1_{nullptr};
  torch::nn::Linear fc2_{nullptr};
};
TORCH_MODULE(TransformerBlock);

/// 12-block ViT backbone emitting tokens tapped after the four configured
/// blocks, evenly spaced from shallow to deep by default.
class VitEncoderImpl : public torch::nn::Module {
 public:
  explicit VitEncoderImpl(EncoderConfig cfg);

  LayerTokens forward(const torch::Tensor& image);

  /// Patch embedding alone (tokens entering block 1).
  torch::Tensor patch_tokens(const torch::Tensor& image);

  const EncoderConfig& config() const { return cfg_; }
  PatchEmbed patch_embed() { return patch_embed_; }
  const std::vector<TransformerBlock>& blocks() const { return blocks_; }

 private:
  EncoderConfig cfg_;
  PatchEmbed patch_embed_{nullptr};
  std::vector<TransformerBlock> blocks_;
};
TORCH_MODULE(VitEncoder);

}  // namespace dsfusion
