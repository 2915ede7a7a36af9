#pragma once

#include <torch/torch.h>

#include <array>
#include <cstdint>
#include <string>

namespace dsfusion {

enum class Branch { kDepth, kSegmentation };

inline const char* to_string(Branch b) {
  return b == Branch::kDepth ? "depth" : "segmentation";
}

/// Bilinear resize of [B, C, H, W] to (h, w); identity when sizes match.
inline torch::Tensor interpolate_bilinear(const torch::Tensor& x, int64_t h, int64_t w) {
  namespace F = torch::nn::functional;
  if (x.size(-2) == h && x.size(-1) == w) return x;
  return F::interpolate(x, F::InterpolateFuncOptions()
                               .size(std::vector<int64_t>{h, w})
                               .mode(torch::kBilinear)
                               .align_corners(false));
}

/// Tokens tapped after four encoder blocks.  Every tap has shape
/// [B, num_patches, embed_dim]; all four share it.
struct LayerTokens {
  std::array<torch::Tensor, 4> taps;
  int64_t grid_h = 0;
  int64_t grid_w = 0;
};

/// Four-level multi-scale feature stack at 1/4, 1/8, 1/16, 1/32 of the
/// input resolution, shallow to deep.  Each level is [B, C, H_f, W_f].
struct FeaturePyramid {
  std::array<torch::Tensor, 4> levels;
  Branch branch = Branch::kDepth;
};

/// All multi-scale features of one refinement iteration: two branches
/// times four levels, shapes matching the corresponding pyramid levels.
struct IterationState {
  std::array<torch::Tensor, 4> depth;
  std::array<torch::Tensor, 4> seg;
  int iteration_index = 0;  // 1-based

  const std::array<torch::Tensor, 4>& branch_levels(Branch b) const {
    return b == Branch::kDepth ? depth : seg;
  }
};

/// Model outputs at full input resolution.  Depth is nonnegative in
/// normalized units; segmentation scores are unnormalized logits.
struct Predictions {
  torch::Tensor depth;       // [B, H, W]
  torch::Tensor seg_logits;  // [B, num_classes, H, W]
};

}  // namespace dsfusion
