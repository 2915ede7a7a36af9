#include "dsfusion/losses.hpp"

namespace dsfusion {

namespace {
using torch::indexing::None;
using torch::indexing::Slice;

// Mean over the two trailing (pixel) dims, then over anything left.
torch::Tensor pixel_mean(const torch::Tensor& x) { return x.mean({-2, -1}).mean(); }
}  // namespace

std::pair<torch::Tensor, torch::Tensor> depth_gradients(const torch::Tensor& depth) {
  TORCH_CHECK(depth.dim() >= 2 && depth.size(-1) >= 2 && depth.size(-2) >= 2,
              "depth_gradients: need at least a 2x2 map");
  auto dx_core = depth.index({"...", Slice(), Slice(1, None)}) -
                 depth.index({"...", Slice(), Slice(None, -1)});
  auto dx = torch::cat({dx_core, torch::zeros_like(depth.index({"...", Slice(), Slice(-1, None)}))},
                       -1);
  auto dy_core = depth.index({"...", Slice(1, None), Slice()}) -
                 depth.index({"...", Slice(None, -1), Slice()});
  auto dy = torch::cat({dy_core, torch::zeros_like(depth.index({"...", Slice(-1, None), Slice()}))},
                       -2);
  return {dx, dy};
}

torch::Tensor normals_from_depth(const torch::Tensor& depth) {
  auto [dx, dy] = depth_gradients(depth);
  auto raw = torch::stack({-dx, -dy, torch::ones_like(depth)}, -3);  // [..., 3, H, W]
  return raw / raw.norm(2, -3, /*keepdim=*/true);
}

torch::Tensor geometric_loss(const torch::Tensor& depth, const torch::Tensor& depth_gt,
                             const LossConfig& cfg) {
  TORCH_CHECK(depth.sizes() == depth_gt.sizes(), "geometric_loss: shape mismatch: ",
              depth.sizes(), " vs ", depth_gt.sizes());
  auto value = (depth - depth_gt).pow(2).mean({-2, -1}).sqrt().mean();

  auto [dx, dy] = depth_gradients(depth);
  auto [gx, gy] = depth_gradients(depth_gt);
  auto grad = pixel_mean((dx - gx).abs() + (dy - gy).abs());

  auto normal = pixel_mean((normals_from_depth(depth) - normals_from_depth(depth_gt)).abs().sum(-3));

  return cfg.w_d * value + cfg.w_g * grad + cfg.w_n * normal;
}

torch::Tensor semantic_loss(const torch::Tensor& seg_logits, const torch::Tensor& seg_gt) {
  const bool batched = seg_logits.dim() == 4;
  TORCH_CHECK(batched || seg_logits.dim() == 3,
              "semantic_loss: logits must be [K, H, W] or [B, K, H, W]");
  auto logits = batched ? seg_logits : seg_logits.unsqueeze(0);
  auto target = batched ? seg_gt : seg_gt.unsqueeze(0);
  TORCH_CHECK(target.dim() == 3, "semantic_loss: targets must be class-id maps");
  const auto num_classes = logits.size(1);
  if (target.numel() > 0) {
    const auto lo = target.min().item<int64_t>();
    const auto hi = target.max().item<int64_t>();
    TORCH_CHECK(lo >= 0 && hi < num_classes, "semantic_loss: class id out of range [0, ",
                num_classes, "): found ", lo < 0 ? lo : hi);
  }
  return torch::nn::functional::cross_entropy(logits, target.to(torch::kLong));
}

LossBreakdown total_loss(const std::vector<IterationState>& states, IterativeDecoder decoder,
                         const torch::Tensor& depth_gt, const torch::Tensor& seg_gt,
                         const LossConfig& cfg) {
  TORCH_CHECK(!states.empty(), "total_loss: no iteration states");
  const auto n_total = static_cast<double>(states.size());
  const auto out_h = depth_gt.size(-2);
  const auto out_w = depth_gt.size(-1);

  LossBreakdown out;
  torch::Tensor geo_sum, sem_sum;
  for (const auto& state : states) {
    torch::Tensor geo_scales, sem_scales;
    for (int level = 0; level < 4; ++level) {
      auto preds = decoder->predict_level(state, level, out_h, out_w);
      auto geo = geometric_loss(preds.depth, depth_gt, cfg);
      auto sem = semantic_loss(preds.seg_logits, seg_gt);
      geo_scales = level == 0 ? geo : geo_scales + geo;
      sem_scales = level == 0 ? sem : sem_scales + sem;
    }
    geo_scales = geo_scales / 4.0;
    sem_scales = sem_scales / 4.0;

    out.per_iteration.push_back(cfg.alpha * geo_scales + cfg.beta * sem_scales);
    const double ramp = cfg.iteration_ramp ? state.iteration_index / n_total : 1.0;
    auto geo_w = ramp * geo_scales;
    auto sem_w = ramp * sem_scales;
    geo_sum = geo_sum.defined() ? geo_sum + geo_w : geo_w;
    sem_sum = sem_sum.defined() ? sem_sum + sem_w : sem_w;
  }
  out.geometric = geo_sum;
  out.semantic = sem_sum;
  out.total = cfg.alpha * geo_sum + cfg.beta * sem_sum;
  return out;
}

}  // namespace dsfusion
