#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace dsfusion {

struct DepthErrors {
  double rmse = 0.0;
  double mae = 0.0;
  double rel = 0.0;
};

/// RMSE / MAE / REL over valid pixels.  `valid` defaults to all pixels.
/// Throws when the mask is empty or ground truth is nonpositive under REL.
DepthErrors depth_metrics(const torch::Tensor& depth, const torch::Tensor& depth_gt,
                          const std::optional<torch::Tensor>& valid = std::nullopt);

/// Mean over classes of |intersection| / |union|, skipping classes absent
/// from both masks.  Masks are [H, W] class ids.
double iou(const torch::Tensor& pred_mask, const torch::Tensor& gt_mask, int64_t num_classes);

/// mAP at IoU > 0.5.  Instances are 4-connected components of the
/// predicted argmax mask per non-background class, scored by mean class
/// probability over their pixels; predictions are rank-matched greedily
/// against ground-truth components and AP uses all-point interpolation.
/// Returns a value in [0, 100].
double map50(const torch::Tensor& pred_prob, const torch::Tensor& gt_mask, int64_t num_classes);

struct MetricsReport {
  double rmse = 0.0;
  double mae = 0.0;
  double rel = 0.0;
  double iou = 0.0;
  double map50 = 0.0;
  int64_t sample_count = 0;

  std::string to_json() const;
  static MetricsReport from_json(const std::string& text);
};

/// Uniform per-image averaging (images weigh equally regardless of size).
MetricsReport aggregate_reports(const std::vector<MetricsReport>& per_image);

}  // namespace dsfusion
