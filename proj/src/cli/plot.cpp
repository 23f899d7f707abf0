#include "rainshift/cli/plot.hpp"

#include <algorithm>
#include <cmath>

#include "rainshift/core/check.hpp"
#include "rainshift/core/image.hpp"

namespace rainshift::cli {

namespace {

constexpr float kColors[6][3] = {
    {0.12f, 0.35f, 0.80f}, {0.85f, 0.33f, 0.10f}, {0.16f, 0.62f, 0.26f},
    {0.60f, 0.20f, 0.65f}, {0.80f, 0.65f, 0.10f}, {0.10f, 0.60f, 0.60f},
};

void put_pixel(Image& img, int y, int x, const float* rgb) {
    if (y < 0 || y >= img.h || x < 0 || x >= img.w) return;
    for (int c = 0; c < 3; ++c) img.at(c, y, x) = rgb[c];
}

void draw_line(Image& img, int y0, int x0, int y1, int x1, const float* rgb) {
    const int steps = std::max(std::abs(y1 - y0), std::abs(x1 - x0)) + 1;
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        put_pixel(img, static_cast<int>(std::lround(y0 + t * (y1 - y0))),
                  static_cast<int>(std::lround(x0 + t * (x1 - x0))), rgb);
    }
}

}  // namespace

void write_line_plot(const std::vector<PlotSeries>& series, const std::string& path, int width,
                     int height) {
    check(!series.empty(), "write_line_plot: no series");
    Image img(3, height, width, 1.f);

    double lo = 1e300, hi = -1e300;
    size_t max_n = 0;
    for (const auto& s : series) {
        for (double v : s.values) {
            if (!std::isfinite(v)) continue;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        max_n = std::max(max_n, s.values.size());
    }
    if (max_n == 0 || lo > hi) {
        lo = 0;
        hi = 1;
    }
    if (hi - lo < 1e-12) hi = lo + 1.0;

    const int margin = 24;
    const float black[3] = {0.f, 0.f, 0.f};
    draw_line(img, height - margin, margin, height - margin, width - 8, black);
    draw_line(img, 8, margin, height - margin, margin, black);

    auto to_y = [&](double v) {
        const double t = (v - lo) / (hi - lo);
        return static_cast<int>(std::lround((height - margin) - t * (height - margin - 8)));
    };
    auto to_x = [&](size_t i, size_t n) {
        if (n <= 1) return margin;
        return margin + static_cast<int>(std::lround(static_cast<double>(i) / (n - 1) *
                                                     (width - 8 - margin)));
    };

    for (size_t si = 0; si < series.size(); ++si) {
        const auto& vals = series[si].values;
        const float* rgb = kColors[si % 6];
        for (size_t i = 0; i + 1 < vals.size(); ++i) {
            if (!std::isfinite(vals[i]) || !std::isfinite(vals[i + 1])) continue;
            draw_line(img, to_y(vals[i]), to_x(i, vals.size()), to_y(vals[i + 1]),
                      to_x(i + 1, vals.size()), rgb);
        }
        // Legend swatch.
        for (int k = 0; k < 10; ++k)
            put_pixel(img, 10 + static_cast<int>(si) * 6, width - 60 + k, rgb);
    }
    save_image(img, path);
}

}  // namespace rainshift::cli
