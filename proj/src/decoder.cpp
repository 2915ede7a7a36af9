#include "dsfusion/decoder.hpp"

#include <algorithm>

namespace dsfusion {

namespace {

torch::Tensor upsample2x(const torch::Tensor& x) {
  return interpolate_bilinear(x, x.size(2) * 2, x.size(3) * 2);
}

}  // namespace

GatedUnitImpl::GatedUnitImpl(int64_t channels) {
  conv_ = register_module("conv",
                          torch::nn::Conv2d(torch::nn::Conv2dOptions(channels, channels, 1)));
  // Zero bias so a zeroed previous state contributes nothing and the
  // first two iterations coincide when prev is all zero.
  torch::nn::init::zeros_(conv_->bias);
}

torch::Tensor GatedUnitImpl::forward(const torch::Tensor& features) {
  return torch::relu(conv_->forward(features));
}

ResidualConvUnitImpl::ResidualConvUnitImpl(int64_t channels) {
  conv1_ = register_module(
      "conv1", torch::nn::Conv2d(torch::nn::Conv2dOptions(channels, channels, 3).padding(1)));
  conv2_ = register_module(
      "conv2", torch::nn::Conv2d(torch::nn::Conv2dOptions(channels, channels, 3).padding(1)));
}

torch::Tensor ResidualConvUnitImpl::forward(const torch::Tensor& features) {
  auto y = conv1_->forward(torch::relu(features));
  y = conv2_->forward(torch::relu(y));
  return features + y;
}

PredictionHeadsImpl::PredictionHeadsImpl(int64_t channels, int64_t num_classes) {
  const int64_t mid = std::max<int64_t>(1, channels / 2);
  depth_conv1_ = register_module(
      "depth_conv1", torch::nn::Conv2d(torch::nn::Conv2dOptions(channels, mid, 3).padding(1)));
  depth_conv2_ = register_module(
      "depth_conv2", torch::nn::Conv2d(torch::nn::Conv2dOptions(mid, mid, 3).padding(1)));
  depth_out_ = register_module("depth_out",
                               torch::nn::Conv2d(torch::nn::Conv2dOptions(mid, 1, 1)));
  // Start the ReLU regression head at mid-range depth; a zero-centered
  // start risks an all-negative preactivation map that ReLU never revives.
  torch::nn::init::constant_(depth_out_->bias, 0.5);
  seg_conv1_ = register_module(
      "seg_conv1", torch::nn::Conv2d(torch::nn::Conv2dOptions(channels, mid, 3).padding(1)));
  seg_conv2_ = register_module(
      "seg_conv2", torch::nn::Conv2d(torch::nn::Conv2dOptions(mid, mid, 3).padding(1)));
  seg_out_ = register_module(
      "seg_out", torch::nn::Conv2d(torch::nn::Conv2dOptions(mid, num_classes, 1)));
}

Predictions PredictionHeadsImpl::forward(const torch::Tensor& depth_feature,
                                         const torch::Tensor& seg_feature, int64_t out_h,
                                         int64_t out_w) {
  // Convolutions run at the feature resolution; the bilinear interpolation
  // to the output size comes last.
  auto d = torch::relu(depth_conv1_->forward(depth_feature));
  d = torch::relu(depth_conv2_->forward(d));
  d = torch::relu(depth_out_->forward(d));  // nonnegative depth
  d = interpolate_bilinear(d, out_h, out_w);

  auto s = torch::relu(seg_conv1_->forward(seg_feature));
  s = torch::relu(seg_conv2_->forward(s));
  s = seg_out_->forward(s);  // logits
  s = interpolate_bilinear(s, out_h, out_w);

  Predictions p;
  p.depth = d.squeeze(1);
  p.seg_logits = s;
  return p;
}

IterativeDecoderImpl::IterativeDecoderImpl(int64_t channels, const FusionConfig& fusion,
                                           const DecoderConfig& cfg)
    : cfg_(cfg), fusion_enabled_(fusion.enabled) {
  cfg_.validate();
  for (int i = 0; i < 4; ++i) {
    const auto suffix = std::to_string(i);
    if (fusion_enabled_)
      sgfm_[i] = register_module("sgfm_" + suffix, Sgfm(channels, fusion.reduction));
    gate_depth_[i] = register_module("gate_depth_" + suffix, GatedUnit(channels));
    gate_seg_[i] = register_module("gate_seg_" + suffix, GatedUnit(channels));
    refine_depth_[i] = register_module("refine_depth_" + suffix, ResidualConvUnit(channels));
    refine_seg_[i] = register_module("refine_seg_" + suffix, ResidualConvUnit(channels));
  }
  heads_ = register_module("heads", PredictionHeads(channels, cfg_.num_classes));
}

IterationState IterativeDecoderImpl::decode_once(const FeaturePyramid& depth_pyramid,
                                                 const FeaturePyramid& seg_pyramid,
                                                 const std::optional<IterationState>& prev) {
  if (prev) {
    TORCH_CHECK(prev->iteration_index >= 1,
                "decode_once: previous state has invalid iteration_index");
    for (int i = 0; i < 4; ++i) {
      TORCH_CHECK(prev->depth[i].sizes() == depth_pyramid.levels[i].sizes() &&
                      prev->seg[i].sizes() == seg_pyramid.levels[i].sizes(),
                  "decode_once: previous state shape mismatch at level ", i);
    }
  }

  std::array<torch::Tensor, 4> fused_depth;
  std::array<torch::Tensor, 4> fused_seg;
  for (int i = 0; i < 4; ++i) {
    auto d = depth_pyramid.levels[i];
    auto s = seg_pyramid.levels[i];
    if (prev) {
      d = d + gate_depth_[i]->forward(prev->depth[i]);
      s = s + gate_seg_[i]->forward(prev->seg[i]);
    }
    if (fusion_enabled_) {
      std::tie(d, s) = sgfm_[i]->forward(d, s);
    }
    fused_depth[i] = d;
    fused_seg[i] = s;
  }

  IterationState out;
  out.iteration_index = prev ? prev->iteration_index + 1 : 1;
  for (int i = 3; i >= 0; --i) {
    auto d = fused_depth[i];
    auto s = fused_seg[i];
    if (i < 3) {
      d = d + upsample2x(out.depth[i + 1]);
      s = s + upsample2x(out.seg[i + 1]);
    }
    out.depth[i] = refine_depth_[i]->forward(d);
    out.seg[i] = refine_seg_[i]->forward(s);
  }
  return out;
}

std::vector<IterationState> IterativeDecoderImpl::run_iterations(
    const FeaturePyramid& depth_pyramid, const FeaturePyramid& seg_pyramid) {
  std::vector<IterationState> states;
  states.reserve(static_cast<size_t>(cfg_.num_iterations));
  std::optional<IterationState> prev;
  for (int64_t n = 1; n <= cfg_.num_iterations; ++n) {
    states.push_back(decode_once(depth_pyramid, seg_pyramid, prev));
    prev = states.back();
  }
  return states;
}

Predictions IterativeDecoderImpl::predict(const IterationState& state, int64_t out_h,
                                          int64_t out_w) {
  return predict_level(state, 0, out_h, out_w);
}

Predictions IterativeDecoderImpl::predict_level(const IterationState& state, int level,
                                                int64_t out_h, int64_t out_w) {
  TORCH_CHECK(level >= 0 && level < 4, "predict_level: level out of range");
  return heads_->forward(state.depth[static_cast<size_t>(level)],
                         state.seg[static_cast<size_t>(level)], out_h, out_w);
}

}  // namespace dsfusion
