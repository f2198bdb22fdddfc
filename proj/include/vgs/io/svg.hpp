#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace vgs::io {

struct Series {
    std::string label;
    std::vector<double> x, y;  ///< non-finite y breaks the polyline
};

struct PlotSpec {
    std::string title, x_label, y_label;
    int width = 640, height = 420;
};

/// Minimal line plot: axes with min/max tick labels, one polyline per series, legend.
std::string render_svg(const PlotSpec& spec, const std::vector<Series>& series);
void write_svg(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace vgs::io
