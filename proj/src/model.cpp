#include "dsfusion/model.hpp"

namespace dsfusion {

ModelImpl::ModelImpl(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  encoder_ = register_module("encoder", VitEncoder(cfg_.encoder));
  reassemble_ = register_module("reassemble", Reassemble(cfg_.encoder, cfg_.channels));
  decoder_ = register_module("decoder",
                             IterativeDecoder(cfg_.channels, cfg_.fusion, cfg_.decoder));
}

std::vector<IterationState> ModelImpl::forward_states(const torch::Tensor& images) {
  auto tokens = encoder_->forward(images);
  auto [depth_pyramid, seg_pyramid] = reassemble_->forward(tokens);
  return decoder_->run_iterations(depth_pyramid, seg_pyramid);
}

Predictions ModelImpl::forward(const torch::Tensor& images) {
  auto states = forward_states(images);
  return decoder_->predict(states.back(), images.size(2), images.size(3));
}

Predictions ModelImpl::predict_one(const torch::Tensor& image) {
  TORCH_CHECK(image.dim() == 3, "predict_one: expected [3, H, W]");
  auto batched = forward(image.unsqueeze(0));
  Predictions p;
  p.depth = batched.depth.squeeze(0);
  p.seg_logits = batched.seg_logits.squeeze(0);
  return p;
}

int64_t ModelImpl::parameter_count() const {
  int64_t count = 0;
  for (const auto& p : parameters())
    if (p.requires_grad()) count += p.numel();
  return count;
}

}  // namespace dsfusion
