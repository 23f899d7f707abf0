#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rainshift {

constexpr uint8_t kIgnoreIndex = 255;

// Planar float image, channels first, values in [0,1].
struct Image {
    int c = 0, h = 0, w = 0;
    std::vector<float> data;

    Image() = default;
    Image(int c_, int h_, int w_, float fill = 0.f)
        : c(c_), h(h_), w(w_), data(static_cast<size_t>(c_) * h_ * w_, fill) {}

    float& at(int ch, int y, int x) { return data[(static_cast<size_t>(ch) * h + y) * w + x]; }
    float at(int ch, int y, int x) const { return data[(static_cast<size_t>(ch) * h + y) * w + x]; }
    size_t size() const { return data.size(); }
};

// Per-pixel class indices; kIgnoreIndex marks pixels excluded from losses
// and metrics.
struct LabelImage {
    int h = 0, w = 0;
    std::vector<uint8_t> data;

    LabelImage() = default;
    LabelImage(int h_, int w_, uint8_t fill = 0)
        : h(h_), w(w_), data(static_cast<size_t>(h_) * w_, fill) {}

    uint8_t& at(int y, int x) { return data[static_cast<size_t>(y) * w + x]; }
    uint8_t at(int y, int x) const { return data[static_cast<size_t>(y) * w + x]; }
    size_t size() const { return data.size(); }
};

// 8-bit binary PPM (P6) for RGB images, PGM (P5) for label maps.
Image load_image(const std::string& path);
void save_image(const Image& img, const std::string& path);
LabelImage load_label(const std::string& path);
void save_label(const LabelImage& lbl, const std::string& path);

}  // namespace rainshift
