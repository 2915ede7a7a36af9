#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace dsfusion {

struct ImageSample {
  torch::Tensor rgb;    // [3, H, W] float32 in [0, 1]
  torch::Tensor depth;  // [H, W] float32 in [0, 1]
  torch::Tensor seg;    // [H, W] int64 class ids
  std::string id;
};

enum class ShapeKind { kSphere, kBox, kCylinder };

/// Scene recipe for the low-contrast synthetic generator.  Objects are
/// alpha-blended refractions of the background, so the segmentation cue
/// is weak by construction while the depth edge at every object boundary
/// is strong (nearest object surface sits at least `min_boundary_step`
/// in front of the background).
struct SceneConfig {
  int64_t image_size = 96;
  int64_t min_objects = 1;
  int64_t max_objects = 3;
  std::vector<ShapeKind> shape_palette{ShapeKind::kSphere, ShapeKind::kBox, ShapeKind::kCylinder};
  double alpha_blend_min = 0.25;  // foreground transparency factor, in (0, 1)
  double alpha_blend_max = 0.55;
  uint64_t background_texture_seed = 0;
  double background_near = 0.70;  // background depth plane range
  double background_far = 1.00;
  double object_near = 0.20;  // object surface depth range
  double object_far = 0.55;
  double min_boundary_step = 0.10;
  double min_object_fraction = 0.03;  // bounds on foreground pixel share
  double max_object_fraction = 0.45;

  void validate() const;
};

/// Deterministic in `seed`.  Background: procedural texture over a tilted
/// depth plane.  Objects: analytic depth patches composited nearest-first.
ImageSample generate_scene(uint64_t seed, const SceneConfig& cfg);

struct DatasetMeta {
  int64_t depth_scale = 65535;  // depth_png_value = round(depth * depth_scale)
  int64_t num_classes = 2;
  int64_t image_size = 96;
};

/// Layout: root/rgb/<id>.png, root/depth/<id>.png (16-bit gray),
/// root/mask/<id>.png (8-bit paletted), root/meta.json.
void save_sample(const std::string& root, const ImageSample& sample, const DatasetMeta& meta);
void write_meta(const std::string& root, const DatasetMeta& meta);
DatasetMeta read_meta(const std::string& root);

/// Loads every triplet under `root`, sorted by id, resized to
/// `target_size` (0 keeps the stored resolution).  No augmentation.
/// Missing or mismatched files are reported with the offending id.
std::vector<ImageSample> load_dataset(const std::string& root, int64_t target_size = 0);

/// Generates `count` samples for seeds [first_seed, first_seed + count)
/// and writes them under `root`.  Disjoint seed ranges give disjoint ids.
void generate_dataset(const std::string& root, uint64_t first_seed, int64_t count,
                      const SceneConfig& cfg);

std::string sample_id_for_seed(uint64_t seed);

/// Resize helpers shared by the loader and the predict path.
torch::Tensor resize_bilinear_2d(const torch::Tensor& map, int64_t size);    // [H, W] float
torch::Tensor resize_nearest_ids(const torch::Tensor& ids, int64_t size);    // [H, W] int64
torch::Tensor resize_bilinear_chw(const torch::Tensor& chw, int64_t size);   // [C, H, W] float

}  // namespace dsfusion
