#include "dsfusion/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dsfusion/png_io.hpp"

namespace fs = std::filesystem;

namespace dsfusion {

namespace {

void seed_everything(const TrainConfig& cfg) {
  if (cfg.deterministic) at::set_num_threads(1);
  torch::manual_seed(static_cast<int64_t>(cfg.seed));
}

std::string config_snapshot(const TrainConfig& cfg) {
  std::string text;
  for (const auto& [k, v] : to_options(cfg)) text += k + " = " + v + "\n";
  return text;
}

// Epoch ordering depends only on (seed, epoch): resuming mid-run replays
// the exact same batches as an uninterrupted run.
std::vector<int64_t> epoch_order(uint64_t seed, int64_t epoch, int64_t n) {
  std::vector<int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(epoch)};
  std::mt19937_64 rng(seq);
  for (int64_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<int64_t>(rng() % static_cast<uint64_t>(i + 1));
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
  }
  return order;
}

torch::Tensor one_hot_probs(const torch::Tensor& ids, int64_t num_classes) {
  auto onehot = torch::nn::functional::one_hot(ids.to(torch::kLong), num_classes);
  return onehot.permute({2, 0, 1}).to(torch::kFloat32);  // [K, H, W]
}

std::array<uint8_t, 3> depth_colormap(double t) {
  // Blue -> cyan -> green -> yellow -> red ramp.
  t = std::clamp(t, 0.0, 1.0);
  const double r = std::clamp(1.5 - std::abs(4 * t - 3), 0.0, 1.0);
  const double g = std::clamp(1.5 - std::abs(4 * t - 2), 0.0, 1.0);
  const double b = std::clamp(1.5 - std::abs(4 * t - 1), 0.0, 1.0);
  return {static_cast<uint8_t>(std::lround(255 * r)), static_cast<uint8_t>(std::lround(255 * g)),
          static_cast<uint8_t>(std::lround(255 * b))};
}

png_io::Palette mask_palette() {
  return {{0, 0, 0},       {255, 255, 255}, {230, 25, 75},  {60, 180, 75},
          {255, 225, 25},  {0, 130, 200},   {245, 130, 48}, {145, 30, 180}};
}

}  // namespace

Trainer::Trainer(const TrainConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  seed_everything(cfg_);
  model_ = Model(cfg_.model);
  optimizer_ = std::make_unique<torch::optim::Adam>(
      model_->parameters(),
      torch::optim::AdamOptions(cfg_.learning_rate).betas({cfg_.adam_beta1, cfg_.adam_beta2}));
}

StepStats Trainer::step(const torch::Tensor& rgb, const torch::Tensor& depth,
                        const torch::Tensor& seg) {
  model_->train();
  optimizer_->zero_grad();
  auto states = model_->forward_states(rgb);
  auto breakdown = total_loss(states, model_->decoder(), depth, seg, cfg_.loss);
  breakdown.total.backward();
  optimizer_->step();

  StepStats stats;
  stats.total = breakdown.total.item<double>();
  stats.geometric = breakdown.geometric.item<double>();
  stats.semantic = breakdown.semantic.item<double>();
  for (const auto& t : breakdown.per_iteration) stats.per_iteration.push_back(t.item<double>());
  return stats;
}

void Trainer::fit(const std::vector<ImageSample>& dataset, std::ostream* log) {
  TORCH_CHECK(!dataset.empty(), "train: dataset is empty");
  if (cfg_.deterministic) at::set_num_threads(1);
  fs::create_directories(cfg_.checkpoint_dir);

  const auto n = static_cast<int64_t>(dataset.size());
  for (int64_t epoch = epochs_done_ + 1; epoch <= cfg_.epochs; ++epoch) {
    const auto order = epoch_order(cfg_.seed, epoch, n);
    for (int64_t start = 0; start < n; start += cfg_.batch_size) {
      const auto end = std::min(n, start + cfg_.batch_size);
      std::vector<torch::Tensor> rgb, depth, seg;
      std::vector<std::string> batch_ids;
      for (int64_t i = start; i < end; ++i) {
        const auto& s = dataset[static_cast<size_t>(order[static_cast<size_t>(i)])];
        rgb.push_back(s.rgb);
        depth.push_back(s.depth);
        seg.push_back(s.seg);
        batch_ids.push_back(s.id);
      }
      const auto stats = step(torch::stack(rgb), torch::stack(depth), torch::stack(seg));
      ++global_step_;

      if (!std::isfinite(stats.total)) {
        std::string ids;
        for (const auto& id : batch_ids) ids += (ids.empty() ? "" : ", ") + id;
        throw std::runtime_error("train: non-finite loss at step " +
                                 std::to_string(global_step_) + " (batch ids: " + ids + ")");
      }
      if (log && global_step_ % cfg_.log_interval == 0) {
        nlohmann::ordered_json j;
        j["step"] = global_step_;
        j["epoch"] = epoch;
        j["loss_total"] = stats.total;
        j["loss_geo"] = stats.geometric;
        j["loss_sem"] = stats.semantic;
        j["per_iteration"] = stats.per_iteration;
        (*log) << j.dump() << "\n";
        log->flush();
        if (!*log) throw std::runtime_error("train: failed to write step log");
      }
    }
    epochs_done_ = epoch;
    save((fs::path(cfg_.checkpoint_dir) / ("ckpt_epoch_" + std::to_string(epoch) + ".pt")).string());
    save((fs::path(cfg_.checkpoint_dir) / "ckpt_last.pt").string());
  }
}

void Trainer::save(const std::string& path) const {
  torch::serialize::OutputArchive root;
  root.write("format_version", torch::IValue(kCheckpointVersion));
  root.write("epoch", torch::IValue(epochs_done_));
  root.write("step", torch::IValue(global_step_));
  root.write("config", torch::IValue(config_snapshot(cfg_)));
  torch::serialize::OutputArchive model_archive;
  model_->save(model_archive);
  root.write("model", model_archive);
  torch::serialize::OutputArchive optim_archive;
  optimizer_->save(optim_archive);
  root.write("optim", optim_archive);
  root.save_to(path);
}

Trainer Trainer::load(const std::string& checkpoint_path) {
  torch::serialize::InputArchive root;
  try {
    root.load_from(checkpoint_path);
  } catch (const c10::Error&) {
    throw std::runtime_error("checkpoint: cannot read '" + checkpoint_path + "'");
  }
  torch::IValue version;
  root.read("format_version", version);
  if (version.toInt() != kCheckpointVersion)
    throw std::runtime_error("checkpoint: format version " + std::to_string(version.toInt()) +
                             " not supported (expected " + std::to_string(kCheckpointVersion) +
                             ")");
  torch::IValue config_text, epoch, step;
  root.read("config", config_text);
  root.read("epoch", epoch);
  root.read("step", step);

  TrainConfig cfg;
  apply_options(cfg, parse_config_text(config_text.toStringRef()));
  cfg.validate();

  Trainer trainer(cfg);
  torch::serialize::InputArchive model_archive;
  root.read("model", model_archive);
  trainer.model_->load(model_archive);
  torch::serialize::InputArchive optim_archive;
  root.read("optim", optim_archive);
  trainer.optimizer_->load(optim_archive);
  trainer.epochs_done_ = epoch.toInt();
  trainer.global_step_ = step.toInt();
  return trainer;
}

MetricsReport evaluate(Model model, const std::vector<ImageSample>& dataset, bool oracle_mode) {
  if (dataset.empty()) throw std::invalid_argument("evaluate: empty dataset");
  torch::NoGradGuard no_grad;
  model->eval();
  const auto num_classes = model->config().decoder.num_classes;

  std::vector<MetricsReport> per_image;
  per_image.reserve(dataset.size());
  for (const auto& sample : dataset) {
    torch::Tensor depth_pred, prob;
    if (oracle_mode) {
      depth_pred = sample.depth;
      prob = one_hot_probs(sample.seg, num_classes);
    } else {
      auto pred = model->predict_one(sample.rgb);
      depth_pred = pred.depth;
      prob = torch::softmax(pred.seg_logits, 0);
    }
    const auto errors = depth_metrics(depth_pred, sample.depth);
    MetricsReport r;
    r.rmse = errors.rmse;
    r.mae = errors.mae;
    r.rel = errors.rel;
    r.iou = iou(prob.argmax(0), sample.seg, num_classes);
    r.map50 = map50(prob, sample.seg, num_classes);
    r.sample_count = 1;
    per_image.push_back(r);
  }
  return aggregate_reports(per_image);
}

void predict_files(Model model, const std::string& image_path, const std::string& out_dir,
                   bool visualization) {
  const auto rgb = png_io::read_rgb8(image_path);
  const int64_t h = rgb.height, w = rgb.width;
  auto rgb_t = torch::empty({3, h, w}, torch::kFloat32);
  auto racc = rgb_t.accessor<float, 3>();
  for (int64_t y = 0; y < h; ++y)
    for (int64_t x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        racc[c][y][x] = rgb.pixels[static_cast<size_t>((y * w + x) * 3 + c)] / 255.f;

  const auto size = model->config().encoder.image_size;
  rgb_t = resize_bilinear_chw(rgb_t, size);

  torch::NoGradGuard no_grad;
  model->eval();
  auto pred = model->predict_one(rgb_t);
  auto depth = pred.depth.clamp(0, 1).contiguous();
  auto mask = pred.seg_logits.argmax(0).contiguous();

  fs::create_directories(out_dir);
  DatasetMeta meta;
  meta.image_size = size;
  meta.num_classes = model->config().decoder.num_classes;
  write_meta(out_dir, meta);

  png_io::ImageU16 depth16;
  depth16.width = depth16.height = static_cast<int>(size);
  depth16.pixels.resize(static_cast<size_t>(size * size));
  auto dacc = depth.accessor<float, 2>();
  for (int64_t y = 0; y < size; ++y)
    for (int64_t x = 0; x < size; ++x)
      depth16.pixels[static_cast<size_t>(y * size + x)] = static_cast<uint16_t>(
          std::lround(static_cast<double>(dacc[y][x]) * static_cast<double>(meta.depth_scale)));
  png_io::write_gray16((fs::path(out_dir) / "depth.png").string(), depth16);

  std::vector<uint8_t> ids(static_cast<size_t>(size * size));
  auto macc = mask.accessor<int64_t, 2>();
  for (int64_t y = 0; y < size; ++y)
    for (int64_t x = 0; x < size; ++x)
      ids[static_cast<size_t>(y * size + x)] = static_cast<uint8_t>(macc[y][x]);
  png_io::write_indexed8((fs::path(out_dir) / "mask.png").string(), static_cast<int>(size),
                         static_cast<int>(size), ids, mask_palette());

  if (visualization) {
    png_io::ImageU8 viz;
    viz.width = viz.height = static_cast<int>(size);
    viz.channels = 3;
    viz.pixels.resize(static_cast<size_t>(3 * size * size));
    for (int64_t y = 0; y < size; ++y)
      for (int64_t x = 0; x < size; ++x) {
        auto color = depth_colormap(dacc[y][x]);
        // Mark predicted object boundaries in white.
        const bool boundary =
            (x + 1 < size && macc[y][x] != macc[y][x + 1]) ||
            (y + 1 < size && macc[y][x] != macc[y + 1][x]);
        if (boundary) color = {255, 255, 255};
        for (int c = 0; c < 3; ++c)
          viz.pixels[static_cast<size_t>((y * size + x) * 3 + c)] = color[static_cast<size_t>(c)];
      }
    png_io::write_rgb8((fs::path(out_dir) / "viz.png").string(), viz);
  }
}

}  // namespace dsfusion
