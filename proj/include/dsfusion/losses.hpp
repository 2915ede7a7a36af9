#pragma once

#include <vector>

#include "dsfusion/common.hpp"
#include "dsfusion/config.hpp"
#include "dsfusion/decoder.hpp"

namespace dsfusion {

/// Forward differences along x (columns) and y (rows); the last column /
/// row carries zero gradient.  Accepts [H, W] or [..., H, W].
std::pair<torch::Tensor, torch::Tensor> depth_gradients(const torch::Tensor& depth);

/// Pixel-grid surface normals: normalize((-dD/dx, -dD/dy, 1)) per pixel,
/// stacked as [..., 3, H, W].  Unit length by construction.
torch::Tensor normals_from_depth(const torch::Tensor& depth);

/// Three-term depth objective:
///   w_d * sqrt(mean (D - D*)^2)                  value (RMS over the map)
/// + w_g * mean(|dx D - dx D*| + |dy D - dy D*|)  gradient L1
/// + w_n * mean(sum_c |N_c - N*_c|)               surface-normal L1
/// Every term is mean-reduced over pixels per sample, then averaged over
/// any leading batch dimensions.
torch::Tensor geometric_loss(const torch::Tensor& depth, const torch::Tensor& depth_gt,
                             const LossConfig& cfg);

/// Mean per-pixel cross-entropy of softmaxed logits.  Logits are
/// [K, H, W] or [B, K, H, W]; targets are class ids of matching shape.
torch::Tensor semantic_loss(const torch::Tensor& seg_logits, const torch::Tensor& seg_gt);

struct LossBreakdown {
  torch::Tensor total;      // alpha * geometric + beta * semantic
  torch::Tensor geometric;  // ramp-weighted, scale-averaged, alpha excluded
  torch::Tensor semantic;   // ramp-weighted, scale-averaged, beta excluded
  std::vector<torch::Tensor> per_iteration;  // unramped alpha*geo + beta*sem per iteration
};

/// Hybrid multi-scale objective: for every iteration n (weight n/N when
/// the ramp is enabled) the heads read each pyramid level, predictions
/// are upsampled to full resolution, and alpha * L_geo + beta * L_sem is
/// averaged over the four scales.
LossBreakdown total_loss(const std::vector<IterationState>& states, IterativeDecoder decoder,
                         const torch::Tensor& depth_gt, const torch::Tensor& seg_gt,
                         const LossConfig& cfg);

}  // namespace dsfusion
