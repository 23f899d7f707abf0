#pragma once

#include <string>
#include <vector>

namespace rainshift::cli {

struct PlotSeries {
    std::string label;
    std::vector<double> values;
};

// Minimal polyline chart rendered straight to an 8-bit image file; good
// enough for eyeballing loss/alpha/coverage trajectories without a plotting
// dependency.
void write_line_plot(const std::vector<PlotSeries>& series, const std::string& path, int width = 640,
                     int height = 320);

}  // namespace rainshift::cli
