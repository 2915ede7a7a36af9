#include "dsfusion/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dsfusion/png_io.hpp"

namespace fs = std::filesystem;

namespace dsfusion::plot {

namespace {

// 5x7 glyphs for numeric tick labels; bit 4 is the leftmost column.
struct Glyph {
  char ch;
  uint8_t rows[7];
};
constexpr Glyph kGlyphs[] = {
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {'e', {0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E}},
};

class Canvas {
 public:
  Canvas(int width, int height) : w_(width), h_(height) {
    pixels_.assign(static_cast<size_t>(3 * w_ * h_), 255);
  }

  void set(int x, int y, uint8_t r, uint8_t g, uint8_t b) {
    if (x < 0 || x >= w_ || y < 0 || y >= h_) return;
    const auto i = static_cast<size_t>((y * w_ + x) * 3);
    pixels_[i] = r;
    pixels_[i + 1] = g;
    pixels_[i + 2] = b;
  }

  void line(int x0, int y0, int x1, int y1, uint8_t r, uint8_t g, uint8_t b) {
    // Bresenham.
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      set(x0, y0, r, g, b);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }

  void text(int x, int y, const std::string& s) {
    for (const char ch : s) {
      for (const auto& glyph : kGlyphs) {
        if (glyph.ch != ch) continue;
        for (int gy = 0; gy < 7; ++gy)
          for (int gx = 0; gx < 5; ++gx)
            if (glyph.rows[gy] & (1 << (4 - gx))) set(x + gx, y + gy, 40, 40, 40);
        break;
      }
      x += 6;
    }
  }

  void write(const std::string& path) const {
    png_io::ImageU8 img;
    img.width = w_;
    img.height = h_;
    img.channels = 3;
    img.pixels = pixels_;
    png_io::write_rgb8(path, img);
  }

 private:
  int w_, h_;
  std::vector<uint8_t> pixels_;
};

std::string format_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

AxisRange axis_range(const Series& series) {
  if (series.xs.empty() || series.xs.size() != series.ys.size())
    throw std::invalid_argument("plot: series '" + series.name + "' is empty or inconsistent");
  AxisRange r;
  r.min_x = *std::min_element(series.xs.begin(), series.xs.end());
  r.max_x = *std::max_element(series.xs.begin(), series.xs.end());
  r.min_y = *std::min_element(series.ys.begin(), series.ys.end());
  r.max_y = *std::max_element(series.ys.begin(), series.ys.end());
  auto pad = [](double& lo, double& hi) {
    const double span = hi - lo;
    const double margin = span > 0 ? 0.05 * span : std::max(0.5, std::abs(hi) * 0.1);
    lo -= margin;
    hi += margin;
  };
  pad(r.min_x, r.max_x);
  pad(r.min_y, r.max_y);
  return r;
}

void render_series(const std::string& path, const Series& series, int width, int height) {
  const auto range = axis_range(series);
  Canvas canvas(width, height);

  const int left = 64, right = 16, top = 16, bottom = 32;
  const int plot_w = width - left - right;
  const int plot_h = height - top - bottom;

  auto to_px = [&](double x) {
    return left + static_cast<int>(std::lround((x - range.min_x) / (range.max_x - range.min_x) *
                                               plot_w));
  };
  auto to_py = [&](double y) {
    return top + plot_h - static_cast<int>(std::lround((y - range.min_y) /
                                                       (range.max_y - range.min_y) * plot_h));
  };

  // Frame and ticks.
  canvas.line(left, top, left, top + plot_h, 0, 0, 0);
  canvas.line(left, top + plot_h, left + plot_w, top + plot_h, 0, 0, 0);
  for (int i = 0; i <= 4; ++i) {
    const double ty = range.min_y + (range.max_y - range.min_y) * i / 4.0;
    const int py = to_py(ty);
    canvas.line(left - 3, py, left, py, 0, 0, 0);
    canvas.text(4, py - 3, format_tick(ty));
    const double tx = range.min_x + (range.max_x - range.min_x) * i / 4.0;
    const int px = to_px(tx);
    canvas.line(px, top + plot_h, px, top + plot_h + 3, 0, 0, 0);
    canvas.text(px - 12, top + plot_h + 8, format_tick(tx));
  }

  // Polyline with small point markers.
  for (size_t i = 0; i < series.xs.size(); ++i) {
    const int px = to_px(series.xs[i]);
    const int py = to_py(series.ys[i]);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) canvas.set(px + dx, py + dy, 180, 40, 40);
    if (i > 0)
      canvas.line(to_px(series.xs[i - 1]), to_py(series.ys[i - 1]), px, py, 180, 40, 40);
  }
  canvas.write(path);
}

void plot_training_log(const std::string& jsonl_path, const std::string& out_dir) {
  std::ifstream in(jsonl_path);
  if (!in) throw std::runtime_error("plot: cannot open '" + jsonl_path + "'");
  Series total{"loss_total", {}, {}}, geo{"loss_geo", {}, {}}, sem{"loss_sem", {}, {}};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const auto step = j.at("step").get<double>();
    total.xs.push_back(step);
    total.ys.push_back(j.at("loss_total").get<double>());
    geo.xs.push_back(step);
    geo.ys.push_back(j.at("loss_geo").get<double>());
    sem.xs.push_back(step);
    sem.ys.push_back(j.at("loss_sem").get<double>());
  }
  if (total.xs.empty()) throw std::runtime_error("plot: log '" + jsonl_path + "' has no entries");
  fs::create_directories(out_dir);
  render_series((fs::path(out_dir) / "loss_total.png").string(), total);
  render_series((fs::path(out_dir) / "loss_geo.png").string(), geo);
  render_series((fs::path(out_dir) / "loss_sem.png").string(), sem);
}

void plot_reports(const std::string& json_path, const std::string& out_dir) {
  std::ifstream in(json_path);
  if (!in) throw std::runtime_error("plot: cannot open '" + json_path + "'");
  nlohmann::json entries;
  in >> entries;
  if (!entries.is_array() || entries.empty())
    throw std::runtime_error("plot: '" + json_path + "' must be a nonempty array of reports");

  std::map<std::string, Series> by_metric;
  for (const auto& entry : entries) {
    const auto x = entry.at("x").get<double>();
    for (const auto& [key, value] : entry.at("report").items()) {
      if (!value.is_number() || key == "sample_count") continue;
      auto& s = by_metric[key];
      s.name = key;
      s.xs.push_back(x);
      s.ys.push_back(value.get<double>());
    }
  }
  fs::create_directories(out_dir);
  for (auto& [key, series] : by_metric) {
    // Sort points by x so the polyline is monotone in x.
    std::vector<size_t> order(series.xs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return series.xs[a] < series.xs[b]; });
    Series sorted{series.name, {}, {}};
    for (const auto i : order) {
      sorted.xs.push_back(series.xs[i]);
      sorted.ys.push_back(series.ys[i]);
    }
    render_series((fs::path(out_dir) / (key + ".png")).string(), sorted);
  }
}

void plot_file(const std::string& in_path, const std::string& out_dir) {
  std::ifstream in(in_path);
  if (!in) throw std::runtime_error("plot: cannot open '" + in_path + "'");
  std::string first_line;
  std::getline(in, first_line);
  in.close();
  const auto begin = first_line.find_first_not_of(" \t\r\n");
  if (begin != std::string::npos && first_line[begin] == '[')
    plot_reports(in_path, out_dir);
  else
    plot_training_log(in_path, out_dir);
}

}  // namespace dsfusion::plot
