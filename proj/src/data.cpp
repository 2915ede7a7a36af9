#include "dsfusion/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dsfusion/common.hpp"
#include "dsfusion/png_io.hpp"

namespace fs = std::filesystem;

namespace dsfusion {

namespace {

// Portable uniform draws; std:: distributions are not pinned across
// library versions, the raw engine output is.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

int64_t uniform_int(std::mt19937_64& rng, int64_t lo, int64_t hi) {  // inclusive
  return lo + static_cast<int64_t>(rng() % static_cast<uint64_t>(hi - lo + 1));
}

struct Wave {
  double fx, fy, phase, amp;
};

struct BackgroundSpec {
  std::array<double, 3> base{};
  std::array<std::array<Wave, 2>, 3> waves{};
  double plane_nx = 0, plane_ny = 0;  // depth gradient direction
  double depth0 = 0, depth1 = 0;
};

struct ObjectSpec {
  ShapeKind kind = ShapeKind::kSphere;
  double cx = 0, cy = 0;   // center, pixels
  double ax = 0, ay = 0;   // radius / half extents, pixels
  double z0 = 0;           // base (farthest) surface depth
  double relief = 0;       // cap height toward the camera
  double alpha = 0.4;      // blend factor
  double warp_px = 4.0;    // refraction displacement scale
  std::array<double, 3> tint{1, 1, 1};
  double rim_shade = 0.12;
};

BackgroundSpec draw_background(std::mt19937_64& rng, const SceneConfig& cfg) {
  BackgroundSpec bg;
  const double angle = uniform(rng, 0, 2 * M_PI);
  bg.plane_nx = std::cos(angle);
  bg.plane_ny = std::sin(angle);
  bg.depth0 = uniform(rng, cfg.background_near, cfg.background_far);
  bg.depth1 = uniform(rng, cfg.background_near, cfg.background_far);
  for (int c = 0; c < 3; ++c) {
    bg.base[c] = uniform(rng, 0.30, 0.70);
    for (auto& w : bg.waves[c]) {
      w.fx = uniform(rng, 0.5, 4.0);
      w.fy = uniform(rng, 0.5, 4.0);
      w.phase = uniform(rng, 0, 2 * M_PI);
      w.amp = uniform(rng, 0.03, 0.10);
    }
  }
  return bg;
}

std::array<double, 3> background_color(const BackgroundSpec& bg, double x, double y, double size) {
  std::array<double, 3> out{};
  for (int c = 0; c < 3; ++c) {
    double v = bg.base[c];
    for (const auto& w : bg.waves[c])
      v += w.amp * std::sin(2 * M_PI * (w.fx * x / size + w.fy * y / size) + w.phase);
    out[c] = std::clamp(v, 0.02, 0.98);
  }
  return out;
}

double background_depth(const BackgroundSpec& bg, double x, double y, double size) {
  // Projection of (x, y) on the gradient direction, mapped to [0, 1].
  const double t = 0.5 + 0.5 * (bg.plane_nx * (2 * x / size - 1) + bg.plane_ny * (2 * y / size - 1)) /
                             std::sqrt(2.0);
  return bg.depth0 + (bg.depth1 - bg.depth0) * std::clamp(t, 0.0, 1.0);
}

ObjectSpec draw_object(std::mt19937_64& rng, const SceneConfig& cfg) {
  ObjectSpec o;
  o.kind = cfg.shape_palette[static_cast<size_t>(
      uniform_int(rng, 0, static_cast<int64_t>(cfg.shape_palette.size()) - 1))];
  const double s = static_cast<double>(cfg.image_size);
  o.cx = uniform(rng, 0.18 * s, 0.82 * s);
  o.cy = uniform(rng, 0.18 * s, 0.82 * s);
  switch (o.kind) {
    case ShapeKind::kSphere:
      o.ax = o.ay = uniform(rng, 0.10 * s, 0.20 * s);
      break;
    case ShapeKind::kBox:
      o.ax = uniform(rng, 0.08 * s, 0.18 * s);
      o.ay = uniform(rng, 0.08 * s, 0.18 * s);
      break;
    case ShapeKind::kCylinder:
      o.ax = uniform(rng, 0.12 * s, 0.24 * s);
      o.ay = uniform(rng, 0.07 * s, 0.14 * s);
      break;
  }
  const double max_relief = std::min(0.15, cfg.object_far - cfg.object_near);
  o.relief = uniform(rng, 0.04, max_relief);
  o.z0 = uniform(rng, cfg.object_near + o.relief, cfg.object_far);
  o.alpha = uniform(rng, cfg.alpha_blend_min, cfg.alpha_blend_max);
  o.warp_px = uniform(rng, 2.5, 6.0);
  for (auto& t : o.tint) t = uniform(rng, 0.85, 1.02);
  o.rim_shade = uniform(rng, 0.08, 0.18);
  return o;
}

/// Normalized interior coordinate q in [0, 1] (1 at the silhouette edge),
/// or a negative value when (x, y) lies outside the object.
double interior_coord(const ObjectSpec& o, double x, double y) {
  const double dx = x - o.cx;
  const double dy = y - o.cy;
  switch (o.kind) {
    case ShapeKind::kSphere:
      return std::hypot(dx, dy) <= o.ax ? std::hypot(dx, dy) / o.ax : -1.0;
    case ShapeKind::kBox:
      if (std::abs(dx) <= o.ax && std::abs(dy) <= o.ay)
        return std::max(std::abs(dx) / o.ax, std::abs(dy) / o.ay);
      return -1.0;
    case ShapeKind::kCylinder:
      if (std::abs(dx) <= o.ax && std::abs(dy) <= o.ay) return std::abs(dy) / o.ay;
      return -1.0;
  }
  return -1.0;
}

double surface_depth(const ObjectSpec& o, double x, double y, double q) {
  switch (o.kind) {
    case ShapeKind::kSphere: {
      const double rho = std::hypot(x - o.cx, y - o.cy) / o.ax;
      return o.z0 - o.relief * std::sqrt(std::max(0.0, 1.0 - rho * rho));
    }
    case ShapeKind::kBox:
      return o.z0;
    case ShapeKind::kCylinder: {
      const double t = (y - o.cy) / o.ay;
      return o.z0 - o.relief * std::sqrt(std::max(0.0, 1.0 - t * t));
    }
  }
  (void)q;
  return o.z0;
}

std::pair<double, double> warp_offset(const ObjectSpec& o, double x, double y, double q) {
  double dx = x - o.cx;
  double dy = y - o.cy;
  if (o.kind == ShapeKind::kCylinder) dx = 0;
  const double len = std::hypot(dx, dy);
  if (len < 1e-9) return {0, 0};
  const double mag = o.warp_px * q * q;
  return {mag * dx / len, mag * dy / len};
}

struct Raster {
  std::vector<float> rgb;    // 3 * S * S, planar
  std::vector<float> depth;  // S * S
  std::vector<int64_t> seg;  // S * S
  int64_t foreground = 0;
};

Raster rasterize(const BackgroundSpec& bg, const std::vector<ObjectSpec>& objects,
                 const SceneConfig& cfg) {
  const auto size = cfg.image_size;
  const double s = static_cast<double>(size);
  Raster r;
  r.rgb.assign(static_cast<size_t>(3 * size * size), 0.f);
  r.depth.assign(static_cast<size_t>(size * size), 0.f);
  r.seg.assign(static_cast<size_t>(size * size), 0);

  for (int64_t yi = 0; yi < size; ++yi) {
    for (int64_t xi = 0; xi < size; ++xi) {
      const double x = xi + 0.5;
      const double y = yi + 0.5;
      const auto idx = static_cast<size_t>(yi * size + xi);

      double depth = background_depth(bg, x, y, s);
      auto color = background_color(bg, x, y, s);
      const ObjectSpec* winner = nullptr;
      double winner_q = 0;
      // Nearest-first compositing: the smallest depth wins the pixel.
      for (const auto& o : objects) {
        const double q = interior_coord(o, x, y);
        if (q < 0) continue;
        const double d = surface_depth(o, x, y, q);
        if (d < depth) {
          depth = d;
          winner = &o;
          winner_q = q;
        }
      }
      if (winner) {
        const auto [wx, wy] = warp_offset(*winner, x, y, winner_q);
        const double sx = std::clamp(x + wx, 0.0, s - 1.0);
        const double sy = std::clamp(y + wy, 0.0, s - 1.0);
        const auto refracted = background_color(bg, sx, sy, s);
        const double rim = 1.0 - winner->rim_shade * winner_q * winner_q * winner_q * winner_q;
        for (int c = 0; c < 3; ++c) {
          const double through = refracted[static_cast<size_t>(c)] *
                                 winner->tint[static_cast<size_t>(c)] * rim;
          color[static_cast<size_t>(c)] =
              std::clamp((1.0 - winner->alpha) * color[static_cast<size_t>(c)] +
                             winner->alpha * through,
                         0.0, 1.0);
        }
        r.seg[idx] = 1;
        ++r.foreground;
      }
      r.depth[idx] = static_cast<float>(depth);
      for (int c = 0; c < 3; ++c)
        r.rgb[static_cast<size_t>(c * size * size) + idx] = static_cast<float>(color[static_cast<size_t>(c)]);
    }
  }
  return r;
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error("data: cannot create directory '" + p.string() + "'");
}

png_io::Palette mask_palette() {
  return {{0, 0, 0},       {255, 255, 255}, {230, 25, 75},  {60, 180, 75},
          {255, 225, 25},  {0, 130, 200},   {245, 130, 48}, {145, 30, 180}};
}

}  // namespace

void SceneConfig::validate() const {
  if (image_size < 8) throw std::invalid_argument("scene: image_size too small");
  if (min_objects < 0 || max_objects < min_objects)
    throw std::invalid_argument("scene: bad num_objects range");
  if (shape_palette.empty()) throw std::invalid_argument("scene: empty shape palette");
  if (!(alpha_blend_min > 0 && alpha_blend_max < 1 && alpha_blend_min <= alpha_blend_max))
    throw std::invalid_argument("scene: alpha_blend range must lie inside (0, 1)");
  if (!(0 < object_near && object_near < object_far))
    throw std::invalid_argument("scene: bad object depth range");
  if (!(object_far < background_near && background_near <= background_far && background_far <= 1.0))
    throw std::invalid_argument("scene: background range must sit behind objects");
  if (background_near - object_far < min_boundary_step)
    throw std::invalid_argument(
        "scene: background_near - object_far must cover min_boundary_step");
  if (!(min_object_fraction >= 0 && max_object_fraction <= 1 &&
        min_object_fraction <= max_object_fraction))
    throw std::invalid_argument("scene: bad object fraction bounds");
}

std::string sample_id_for_seed(uint64_t seed) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%010llu", static_cast<unsigned long long>(seed));
  return buf;
}

ImageSample generate_scene(uint64_t seed, const SceneConfig& cfg) {
  cfg.validate();
  std::seed_seq seq{
      static_cast<uint32_t>(cfg.background_texture_seed), static_cast<uint32_t>(cfg.background_texture_seed >> 32),
      static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)};
  std::mt19937_64 rng(seq);

  const auto bg = draw_background(rng, cfg);
  const auto total = static_cast<double>(cfg.image_size * cfg.image_size);

  Raster raster;
  constexpr int kMaxAttempts = 100;
  for (int attempt = 0;; ++attempt) {
    const auto count = uniform_int(rng, cfg.min_objects, cfg.max_objects);
    std::vector<ObjectSpec> objects;
    objects.reserve(static_cast<size_t>(count));
    for (int64_t i = 0; i < count; ++i) objects.push_back(draw_object(rng, cfg));
    raster = rasterize(bg, objects, cfg);
    if (count == 0) break;
    const double fraction = static_cast<double>(raster.foreground) / total;
    if (fraction >= cfg.min_object_fraction && fraction <= cfg.max_object_fraction) break;
    if (attempt + 1 >= kMaxAttempts)
      throw std::runtime_error("generate_scene: could not satisfy object fraction bounds");
  }

  ImageSample sample;
  const auto size = cfg.image_size;
  sample.rgb = torch::from_blob(raster.rgb.data(), {3, size, size}, torch::kFloat32).clone();
  sample.depth = torch::from_blob(raster.depth.data(), {size, size}, torch::kFloat32).clone();
  sample.seg = torch::from_blob(raster.seg.data(), {size, size}, torch::kInt64).clone();
  sample.id = sample_id_for_seed(seed);
  return sample;
}

void write_meta(const std::string& root, const DatasetMeta& meta) {
  ensure_dir(root);
  nlohmann::ordered_json j;
  j["depth_scale"] = meta.depth_scale;
  j["num_classes"] = meta.num_classes;
  j["image_size"] = meta.image_size;
  std::ofstream out(fs::path(root) / "meta.json");
  if (!out) throw std::runtime_error("data: cannot write meta.json under '" + root + "'");
  out << j.dump(2) << "\n";
}

DatasetMeta read_meta(const std::string& root) {
  std::ifstream in(fs::path(root) / "meta.json");
  if (!in) throw std::runtime_error("data: missing meta.json under '" + root + "'");
  nlohmann::json j;
  in >> j;
  DatasetMeta meta;
  meta.depth_scale = j.at("depth_scale").get<int64_t>();
  meta.num_classes = j.at("num_classes").get<int64_t>();
  meta.image_size = j.at("image_size").get<int64_t>();
  if (meta.depth_scale < 1 || meta.depth_scale > 65535)
    throw std::runtime_error("data: depth_scale out of range in meta.json");
  return meta;
}

void save_sample(const std::string& root, const ImageSample& sample, const DatasetMeta& meta) {
  const auto h = sample.depth.size(0);
  const auto w = sample.depth.size(1);
  TORCH_CHECK(sample.rgb.dim() == 3 && sample.rgb.size(0) == 3 && sample.rgb.size(1) == h &&
                  sample.rgb.size(2) == w && sample.seg.sizes() == sample.depth.sizes(),
              "save_sample: inconsistent shapes for id ", sample.id);
  ensure_dir(fs::path(root) / "rgb");
  ensure_dir(fs::path(root) / "depth");
  ensure_dir(fs::path(root) / "mask");

  auto rgb = sample.rgb.to(torch::kFloat32).contiguous();
  auto depth = sample.depth.to(torch::kFloat32).contiguous();
  auto seg = sample.seg.to(torch::kInt64).contiguous();

  png_io::ImageU8 rgb8;
  rgb8.width = static_cast<int>(w);
  rgb8.height = static_cast<int>(h);
  rgb8.channels = 3;
  rgb8.pixels.resize(static_cast<size_t>(3 * h * w));
  auto racc = rgb.accessor<float, 3>();
  for (int64_t y = 0; y < h; ++y)
    for (int64_t x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        rgb8.pixels[static_cast<size_t>((y * w + x) * 3 + c)] = static_cast<uint8_t>(
            std::lround(std::clamp(racc[c][y][x], 0.f, 1.f) * 255.f));

  png_io::ImageU16 depth16;
  depth16.width = static_cast<int>(w);
  depth16.height = static_cast<int>(h);
  depth16.pixels.resize(static_cast<size_t>(h * w));
  auto dacc = depth.accessor<float, 2>();
  const auto scale = static_cast<double>(meta.depth_scale);
  for (int64_t y = 0; y < h; ++y)
    for (int64_t x = 0; x < w; ++x)
      depth16.pixels[static_cast<size_t>(y * w + x)] = static_cast<uint16_t>(
          std::lround(std::clamp(static_cast<double>(dacc[y][x]), 0.0, 1.0) * scale));

  std::vector<uint8_t> ids(static_cast<size_t>(h * w));
  auto sacc = seg.accessor<int64_t, 2>();
  for (int64_t y = 0; y < h; ++y)
    for (int64_t x = 0; x < w; ++x) {
      const auto v = sacc[y][x];
      TORCH_CHECK(v >= 0 && v < meta.num_classes, "save_sample: class id out of range for id ",
                  sample.id);
      ids[static_cast<size_t>(y * w + x)] = static_cast<uint8_t>(v);
    }

  png_io::write_rgb8((fs::path(root) / "rgb" / (sample.id + ".png")).string(), rgb8);
  png_io::write_gray16((fs::path(root) / "depth" / (sample.id + ".png")).string(), depth16);
  png_io::write_indexed8((fs::path(root) / "mask" / (sample.id + ".png")).string(),
                         static_cast<int>(w), static_cast<int>(h), ids, mask_palette());
}

torch::Tensor resize_bilinear_2d(const torch::Tensor& map, int64_t size) {
  return interpolate_bilinear(map.unsqueeze(0).unsqueeze(0), size, size).squeeze(0).squeeze(0);
}

torch::Tensor resize_bilinear_chw(const torch::Tensor& chw, int64_t size) {
  return interpolate_bilinear(chw.unsqueeze(0), size, size).squeeze(0);
}

torch::Tensor resize_nearest_ids(const torch::Tensor& ids, int64_t size) {
  namespace F = torch::nn::functional;
  if (ids.size(0) == size && ids.size(1) == size) return ids;
  auto out = F::interpolate(ids.to(torch::kFloat32).unsqueeze(0).unsqueeze(0),
                            F::InterpolateFuncOptions().size(std::vector<int64_t>{size, size}).mode(
                                torch::kNearest));
  return out.squeeze(0).squeeze(0).to(torch::kInt64);
}

std::vector<ImageSample> load_dataset(const std::string& root, int64_t target_size) {
  const auto meta = read_meta(root);
  const int64_t out_size = target_size > 0 ? target_size : meta.image_size;

  std::set<std::string> ids;
  const std::array<const char*, 3> kinds{"rgb", "depth", "mask"};
  for (const auto* kind : kinds) {
    const auto dir = fs::path(root) / kind;
    if (!fs::is_directory(dir)) throw std::runtime_error("data: missing directory '" + dir.string() + "'");
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".png") ids.insert(entry.path().stem().string());
    }
  }

  std::vector<ImageSample> samples;
  samples.reserve(ids.size());
  for (const auto& id : ids) {  // std::set iterates sorted by id
    const auto rgb_path = fs::path(root) / "rgb" / (id + ".png");
    const auto depth_path = fs::path(root) / "depth" / (id + ".png");
    const auto mask_path = fs::path(root) / "mask" / (id + ".png");
    for (const auto& p : {rgb_path, depth_path, mask_path})
      if (!fs::exists(p))
        throw std::runtime_error("data: incomplete triplet for id '" + id + "': missing " +
                                 p.string());

    ImageSample sample;
    sample.id = id;
    try {
      const auto rgb = png_io::read_rgb8(rgb_path.string());
      const auto depth = png_io::read_gray16(depth_path.string());
      const auto mask = png_io::read_mask(mask_path.string());
      if (rgb.width != depth.width || rgb.height != depth.height || rgb.width != mask.width ||
          rgb.height != mask.height)
        throw std::runtime_error("image sizes disagree");

      const int64_t h = rgb.height, w = rgb.width;
      auto rgb_t = torch::empty({3, h, w}, torch::kFloat32);
      auto racc = rgb_t.accessor<float, 3>();
      for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < w; ++x)
          for (int c = 0; c < 3; ++c)
            racc[c][y][x] = rgb.pixels[static_cast<size_t>((y * w + x) * 3 + c)] / 255.f;

      auto depth_t = torch::empty({h, w}, torch::kFloat32);
      auto dacc = depth_t.accessor<float, 2>();
      for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < w; ++x)
          dacc[y][x] = static_cast<float>(depth.pixels[static_cast<size_t>(y * w + x)] /
                                          static_cast<double>(meta.depth_scale));

      auto seg_t = torch::empty({h, w}, torch::kInt64);
      auto sacc = seg_t.accessor<int64_t, 2>();
      for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < w; ++x) {
          const auto v = mask.pixels[static_cast<size_t>(y * w + x)];
          if (v >= meta.num_classes)
            throw std::runtime_error("mask id " + std::to_string(v) + " out of range");
          sacc[y][x] = v;
        }

      sample.rgb = resize_bilinear_chw(rgb_t, out_size);
      sample.depth = resize_bilinear_2d(depth_t, out_size);
      sample.seg = resize_nearest_ids(seg_t, out_size);
    } catch (const std::exception& e) {
      throw std::runtime_error("data: sample '" + id + "': " + e.what());
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

void generate_dataset(const std::string& root, uint64_t first_seed, int64_t count,
                      const SceneConfig& cfg) {
  cfg.validate();
  DatasetMeta meta;
  meta.image_size = cfg.image_size;
  meta.num_classes = 2;
  write_meta(root, meta);
  for (int64_t i = 0; i < count; ++i)
    save_sample(root, generate_scene(first_seed + static_cast<uint64_t>(i), cfg), meta);
}

}  // namespace dsfusion
