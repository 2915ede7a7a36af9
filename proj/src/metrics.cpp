#include "dsfusion/metrics.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dsfusion {

namespace {

void check_ids(const torch::Tensor& mask, int64_t num_classes, const char* who) {
  TORCH_CHECK(mask.numel() > 0, who, ": empty mask");
  const auto lo = mask.min().item<int64_t>();
  const auto hi = mask.max().item<int64_t>();
  TORCH_CHECK(lo >= 0 && hi < num_classes, who, ": class id out of range [0, ", num_classes, ")");
}

// 4-connected components of (mask == cls), pixels in row-major discovery
// order so downstream ordering is deterministic.
std::vector<std::vector<int64_t>> components_of_class(const torch::Tensor& mask, int64_t cls) {
  const auto h = mask.size(0);
  const auto w = mask.size(1);
  auto acc = mask.accessor<int64_t, 2>();
  std::vector<char> seen(static_cast<size_t>(h * w), 0);
  std::vector<std::vector<int64_t>> components;

  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      const auto start = y * w + x;
      if (seen[start] || acc[y][x] != cls) continue;
      std::vector<int64_t> pixels;
      std::deque<int64_t> queue{start};
      seen[start] = 1;
      while (!queue.empty()) {
        const auto p = queue.front();
        queue.pop_front();
        pixels.push_back(p);
        const auto py = p / w;
        const auto px = p % w;
        const int64_t neighbors[4][2] = {{py - 1, px}, {py + 1, px}, {py, px - 1}, {py, px + 1}};
        for (const auto& [ny, nx] : neighbors) {
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
          const auto q = ny * w + nx;
          if (!seen[q] && acc[ny][nx] == cls) {
            seen[q] = 1;
            queue.push_back(q);
          }
        }
      }
      components.push_back(std::move(pixels));
    }
  }
  return components;
}

double component_iou(const std::vector<int64_t>& a, const std::vector<int64_t>& b) {
  // Pixel lists are sorted ascending (BFS over a row-major frontier is
  // not sorted, so sort copies here).
  std::vector<int64_t> sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<int64_t> inter;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
  const auto uni = sa.size() + sb.size() - inter.size();
  return uni == 0 ? 0.0 : static_cast<double>(inter.size()) / static_cast<double>(uni);
}

// Area under the precision-recall curve with all-point interpolation.
double average_precision(const std::vector<char>& tp_by_rank, int64_t num_gt) {
  if (num_gt == 0) return 0.0;
  if (tp_by_rank.empty()) return 0.0;
  const auto n = tp_by_rank.size();
  std::vector<double> precision(n), recall(n);
  int64_t tp = 0;
  for (size_t i = 0; i < n; ++i) {
    tp += tp_by_rank[i];
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(num_gt);
  }
  for (size_t i = n - 1; i-- > 0;) precision[i] = std::max(precision[i], precision[i + 1]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

}  // namespace

DepthErrors depth_metrics(const torch::Tensor& depth, const torch::Tensor& depth_gt,
                          const std::optional<torch::Tensor>& valid) {
  TORCH_CHECK(depth.sizes() == depth_gt.sizes(), "depth_metrics: shape mismatch");
  auto mask = valid.value_or(torch::ones_like(depth_gt, torch::kBool));
  TORCH_CHECK(mask.sizes() == depth_gt.sizes(), "depth_metrics: mask shape mismatch");
  auto d = depth.masked_select(mask).to(torch::kDouble);
  auto g = depth_gt.masked_select(mask).to(torch::kDouble);
  TORCH_CHECK(d.numel() > 0, "depth_metrics: empty valid mask");
  TORCH_CHECK(g.min().item<double>() > 0.0,
              "depth_metrics: REL requires positive ground-truth depth on valid pixels");
  auto diff = d - g;
  DepthErrors e;
  e.rmse = diff.pow(2).mean().sqrt().item<double>();
  e.mae = diff.abs().mean().item<double>();
  e.rel = (diff.abs() / g).mean().item<double>();
  return e;
}

double iou(const torch::Tensor& pred_mask, const torch::Tensor& gt_mask, int64_t num_classes) {
  TORCH_CHECK(pred_mask.sizes() == gt_mask.sizes(), "iou: shape mismatch");
  auto pred = pred_mask.to(torch::kLong);
  auto gt = gt_mask.to(torch::kLong);
  check_ids(pred, num_classes, "iou");
  check_ids(gt, num_classes, "iou");
  double sum = 0.0;
  int64_t counted = 0;
  for (int64_t c = 0; c < num_classes; ++c) {
    auto p = pred == c;
    auto g = gt == c;
    const auto uni = (p | g).sum().item<int64_t>();
    if (uni == 0) continue;  // class absent from both: undefined ratio
    const auto inter = (p & g).sum().item<int64_t>();
    sum += static_cast<double>(inter) / static_cast<double>(uni);
    ++counted;
  }
  return sum / static_cast<double>(counted);
}

double map50(const torch::Tensor& pred_prob, const torch::Tensor& gt_mask, int64_t num_classes) {
  TORCH_CHECK(pred_prob.dim() == 3 && pred_prob.size(0) == num_classes,
              "map50: pred_prob must be [num_classes, H, W]");
  TORCH_CHECK(gt_mask.dim() == 2 && gt_mask.size(0) == pred_prob.size(1) &&
                  gt_mask.size(1) == pred_prob.size(2),
              "map50: mask shape mismatch");
  auto prob = pred_prob.to(torch::kDouble).contiguous();
  auto gt = gt_mask.to(torch::kLong).contiguous();
  check_ids(gt, num_classes, "map50");
  auto pred_ids = prob.argmax(0);
  const auto w = gt.size(1);
  auto prob_acc = prob.accessor<double, 3>();

  double ap_sum = 0.0;
  int64_t classes_counted = 0;
  for (int64_t c = 1; c < num_classes; ++c) {  // class 0 is background
    auto pred_components = components_of_class(pred_ids, c);
    auto gt_components = components_of_class(gt, c);
    if (pred_components.empty() && gt_components.empty()) continue;
    ++classes_counted;

    std::vector<double> scores(pred_components.size());
    for (size_t i = 0; i < pred_components.size(); ++i) {
      double s = 0.0;
      for (const auto p : pred_components[i]) s += prob_acc[c][p / w][p % w];
      scores[i] = s / static_cast<double>(pred_components[i].size());
    }
    std::vector<size_t> order(pred_components.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    std::vector<char> gt_matched(gt_components.size(), 0);
    std::vector<char> tp_by_rank;
    tp_by_rank.reserve(order.size());
    for (const auto idx : order) {
      double best_iou = 0.0;
      int64_t best_gt = -1;
      for (size_t j = 0; j < gt_components.size(); ++j) {
        if (gt_matched[j]) continue;
        const auto overlap = component_iou(pred_components[idx], gt_components[j]);
        if (overlap > best_iou) {
          best_iou = overlap;
          best_gt = static_cast<int64_t>(j);
        }
      }
      if (best_gt >= 0 && best_iou > 0.5) {
        gt_matched[static_cast<size_t>(best_gt)] = 1;
        tp_by_rank.push_back(1);
      } else {
        tp_by_rank.push_back(0);
      }
    }
    ap_sum += average_precision(tp_by_rank, static_cast<int64_t>(gt_components.size()));
  }
  // No foreground anywhere and none predicted: vacuously perfect.
  if (classes_counted == 0) return 100.0;
  return 100.0 * ap_sum / static_cast<double>(classes_counted);
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["rmse"] = rmse;
  j["mae"] = mae;
  j["rel"] = rel;
  j["iou"] = iou;
  j["map50"] = map50;
  j["sample_count"] = sample_count;
  return j.dump(2) + "\n";
}

MetricsReport MetricsReport::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  MetricsReport r;
  r.rmse = j.at("rmse").get<double>();
  r.mae = j.at("mae").get<double>();
  r.rel = j.at("rel").get<double>();
  r.iou = j.at("iou").get<double>();
  r.map50 = j.at("map50").get<double>();
  r.sample_count = j.at("sample_count").get<int64_t>();
  return r;
}

MetricsReport aggregate_reports(const std::vector<MetricsReport>& per_image) {
  if (per_image.empty()) throw std::invalid_argument("metrics: nothing to aggregate");
  MetricsReport out;
  for (const auto& r : per_image) {
    out.rmse += r.rmse;
    out.mae += r.mae;
    out.rel += r.rel;
    out.iou += r.iou;
    out.map50 += r.map50;
    out.sample_count += r.sample_count;
  }
  const auto n = static_cast<double>(per_image.size());
  out.rmse /= n;
  out.mae /= n;
  out.rel /= n;
  out.iou /= n;
  out.map50 /= n;
  return out;
}

}  // namespace dsfusion
