#pragma once

#include <string>
#include <vector>

namespace dsfusion::plot {

struct Series {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
};

struct AxisRange {
  double min_x = 0, max_x = 1;
  double min_y = 0, max_y = 1;
};

/// Padded data bounds; always covers every point of the series.
AxisRange axis_range(const Series& series);

/// Renders one series as a line chart with numeric tick labels.
void render_series(const std::string& path, const Series& series, int width = 720,
                   int height = 440);

/// Loss curves (loss_total/geo/sem vs step) from a JSONL training log;
/// one PNG per key under `out_dir`.  Throws on an empty or unreadable log.
void plot_training_log(const std::string& jsonl_path, const std::string& out_dir);

/// Metric curves from a JSON array of {"x": number, "report": {...}}
/// entries (e.g. iteration-count ablations); one PNG per metric.
void plot_reports(const std::string& json_path, const std::string& out_dir);

/// Dispatches on content: JSONL logs vs report arrays.
void plot_file(const std::string& in_path, const std::string& out_dir);

}  // namespace dsfusion::plot
