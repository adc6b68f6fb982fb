#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dwis {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

/// Minimal SVG line chart: frame, ticks, one polyline per series, legend.
std::string render_svg(const LinePlot& plot);

/// File names of the figures written by write_figures, in figure order.
const std::vector<std::string>& figure_files();

/// Rebuilds every figure from `manifest.csv` and the cell CSVs under `out_dir`. Series average
/// over seeds for each (scheme, mu, delta0) group. With `db_axis`, cost figures plot
/// 10 log10(cost).
void write_figures(const std::filesystem::path& out_dir, bool db_axis);

} // namespace dwis
