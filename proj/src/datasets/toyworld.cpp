#include "rainshift/datasets/toyworld.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "rainshift/core/check.hpp"
#include "rainshift/core/rng.hpp"

namespace fs = std::filesystem;

namespace rainshift::datasets {

std::string to_string(ToyDomain d) {
    switch (d) {
        case ToyDomain::source_clear: return "source_clear";
        case ToyDomain::target_rain: return "target_rain";
        case ToyDomain::bridge_clear: return "bridge_clear";
        case ToyDomain::bridge_rain: return "bridge_rain";
    }
    return "?";
}

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

uint64_t sample_seed(uint64_t base, ToyDomain domain, int index) {
    uint64_t s = splitmix64(base);
    s = splitmix64(s ^ (static_cast<uint64_t>(domain) + 1));
    s = splitmix64(s ^ static_cast<uint64_t>(index));
    return s;
}

bool is_rain(ToyDomain d) { return d == ToyDomain::target_rain || d == ToyDomain::bridge_rain; }
bool is_bridge(ToyDomain d) { return d == ToyDomain::bridge_clear || d == ToyDomain::bridge_rain; }

// Distinct base colors per shape class; classes beyond the table cycle.
constexpr float kPalette[6][3] = {
    {0.78f, 0.22f, 0.24f},  // red
    {0.22f, 0.68f, 0.30f},  // green
    {0.24f, 0.36f, 0.82f},  // blue
    {0.85f, 0.74f, 0.22f},  // yellow
    {0.70f, 0.30f, 0.75f},  // purple
    {0.25f, 0.72f, 0.72f},  // teal
};

void draw_shapes(const ToyWorldConfig& cfg, Rng& rng, Image& img, LabelImage& lbl,
                 ToyRenderInfo& info) {
    const int h = cfg.image_h, w = cfg.image_w;

    const float bg = 0.55f + 0.2f * static_cast<float>(rng.uniform());
    float bg_rgb[3];
    for (auto& v : bg_rgb) v = bg + 0.06f * static_cast<float>(rng.uniform() - 0.5);
    for (int ch = 0; ch < 3; ++ch)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) img.at(ch, y, x) = bg_rgb[ch];

    const int max_shapes = std::max(1, static_cast<int>(std::lround(cfg.shape_density * 8)));
    const int count = 1 + rng.uniform_int(max_shapes);
    info.shape_count = count;
    const double unit = std::min(h, w);

    for (int i = 0; i < count; ++i) {
        const int cls = 1 + rng.uniform_int(cfg.class_count - 1);
        const int kind = (cls - 1) % 3;  // 0 box, 1 disc, 2 triangle
        const double radius = (0.09 + 0.13 * rng.uniform()) * unit;
        const double cy = radius + rng.uniform() * (h - 2 * radius);
        const double cx = radius + rng.uniform() * (w - 2 * radius);
        float rgb[3];
        for (int ch = 0; ch < 3; ++ch)
            rgb[ch] = std::clamp(
                kPalette[(cls - 1) % 6][ch] + 0.12f * static_cast<float>(rng.uniform() - 0.5), 0.f,
                1.f);

        const int y0 = std::max(0, static_cast<int>(cy - radius) - 1);
        const int y1 = std::min(h - 1, static_cast<int>(cy + radius) + 1);
        const int x0 = std::max(0, static_cast<int>(cx - radius) - 1);
        const int x1 = std::min(w - 1, static_cast<int>(cx + radius) + 1);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double dy = y - cy, dx = x - cx;
                bool inside = false;
                switch (kind) {
                    case 0: inside = std::abs(dx) <= radius && std::abs(dy) <= 0.7 * radius; break;
                    case 1: inside = dx * dx + dy * dy <= radius * radius; break;
                    case 2:
                        inside = dy >= -radius && dy <= radius &&
                                 std::abs(dx) <= 0.5 * (dy + radius);
                        break;
                }
                if (!inside) continue;
                for (int ch = 0; ch < 3; ++ch) img.at(ch, y, x) = rgb[ch];
                lbl.at(y, x) = static_cast<uint8_t>(cls);
            }
        }
    }

    // Mild sensor noise so the background is not constant.
    for (auto& v : img.data)
        v = std::clamp(v + 0.02f * static_cast<float>(rng.normal()), 0.f, 1.f);
}

void apply_setup(const SetupParams& p, Image& img) {
    const int h = img.h, w = img.w;
    const double cy = 0.5 * (h - 1), cx = 0.5 * (w - 1);
    const double dmax2 = cy * cy + cx * cx;
    const float shift = static_cast<float>(p.hue_shift);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
            const float vig = 1.f - static_cast<float>(p.vignette_strength * d2 / dmax2);
            img.at(0, y, x) = std::clamp(img.at(0, y, x) * vig + shift, 0.f, 1.f);
            img.at(1, y, x) = std::clamp(img.at(1, y, x) * vig, 0.f, 1.f);
            img.at(2, y, x) = std::clamp(img.at(2, y, x) * vig - shift, 0.f, 1.f);
        }
    }
}

void box_blur(Image& img, int radius) {
    if (radius <= 0) return;
    const int h = img.h, w = img.w;
    Image tmp(img.c, h, w);
    const float inv = 1.f / static_cast<float>(2 * radius + 1);
    for (int ch = 0; ch < img.c; ++ch) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                float s = 0.f;
                for (int k = -radius; k <= radius; ++k)
                    s += img.at(ch, y, std::clamp(x + k, 0, w - 1));
                tmp.at(ch, y, x) = s * inv;
            }
        }
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                float s = 0.f;
                for (int k = -radius; k <= radius; ++k)
                    s += tmp.at(ch, std::clamp(y + k, 0, h - 1), x);
                img.at(ch, y, x) = s * inv;
            }
        }
    }
}

void apply_rain(const RainParams& p, Rng& rng, Image& img, ToyRenderInfo& info) {
    const float dark = static_cast<float>(p.darkening_factor);
    const float desat = static_cast<float>(p.desaturation);
    const size_t plane = static_cast<size_t>(img.h) * img.w;
    for (size_t i = 0; i < plane; ++i) {
        float& r = img.data[i];
        float& g = img.data[plane + i];
        float& b = img.data[2 * plane + i];
        const float luma = (r + g + b) / 3.f;
        r = ((1.f - desat) * r + desat * luma) * dark;
        g = ((1.f - desat) * g + desat * luma) * dark;
        b = ((1.f - desat) * b + desat * luma) * dark;
    }
    box_blur(img, p.blur_radius);
    const int count = p.droplet_count_min +
                      rng.uniform_int(p.droplet_count_max - p.droplet_count_min + 1);
    info.droplet_count = count;
    for (int i = 0; i < count; ++i) {
        const double cy = rng.uniform() * (img.h - 1);
        const double cx = rng.uniform() * (img.w - 1);
        const double r =
            p.droplet_radius_min + rng.uniform() * (p.droplet_radius_max - p.droplet_radius_min);
        render_droplet(img, cy, cx, r);
    }
}

}  // namespace

void render_droplet(Image& img, double cy, double cx, double radius) {
    const int y0 = std::max(0, static_cast<int>(cy - radius) - 1);
    const int y1 = std::min(img.h - 1, static_cast<int>(cy + radius) + 1);
    const int x0 = std::max(0, static_cast<int>(cx - radius) - 1);
    const int x1 = std::min(img.w - 1, static_cast<int>(cx + radius) + 1);
    const float bright[3] = {0.90f, 0.92f, 0.96f};
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double d = std::hypot(y - cy, x - cx) / radius;
            if (d > 1.0) continue;
            for (int ch = 0; ch < 3; ++ch) {
                float& v = img.at(ch, y, x);
                if (d > 0.7) {
                    v *= 0.3f;  // dark rim
                } else {
                    v = 0.25f * v + 0.75f * bright[ch];
                }
            }
        }
    }
}

void render_toy_sample(const ToyWorldConfig& cfg, ToyDomain domain, int index, Image& img,
                       LabelImage& lbl, ToyRenderInfo* info) {
    check(cfg.image_h > 0 && cfg.image_w > 0, "toy world: image size must be positive");
    check(cfg.class_count >= 2, "toy world: need at least background + one shape class");
    check(cfg.rain.darkening_factor >= 0.0 && cfg.rain.darkening_factor <= 1.0,
          "toy world: darkening_factor must be in [0,1]");
    check(cfg.rain.desaturation >= 0.0 && cfg.rain.desaturation <= 1.0,
          "toy world: desaturation must be in [0,1]");
    check(cfg.rain.droplet_count_max >= cfg.rain.droplet_count_min &&
              cfg.rain.droplet_radius_max >= cfg.rain.droplet_radius_min,
          "toy world: empty rain parameter range");

    Rng rng(sample_seed(cfg.seed, domain, index));
    img = Image(3, cfg.image_h, cfg.image_w);
    lbl = LabelImage(cfg.image_h, cfg.image_w, 0);
    ToyRenderInfo local;
    draw_shapes(cfg, rng, img, lbl, local);
    if (is_bridge(domain)) apply_setup(cfg.setup, img);
    if (is_rain(domain)) apply_rain(cfg.rain, rng, img, local);
    if (info) *info = local;
}

DatasetManifest generate_toy_dataset(const ToyWorldConfig& cfg, int n, ToyDomain domain,
                                     const std::string& out_dir) {
    check(n >= 1, "generate_toy_dataset: n must be >= 1");
    const fs::path images = fs::absolute(fs::path(out_dir) / "images");
    const fs::path labels = fs::absolute(fs::path(out_dir) / "labels");
    fs::create_directories(images);
    fs::create_directories(labels);

    DatasetManifest m;
    m.name = "toy_" + to_string(domain);
    m.class_count = cfg.class_count;
    m.class_names = {"background"};
    const char* shape_names[] = {"box", "disc", "tri"};
    for (int q = 1; q < cfg.class_count; ++q) {
        std::string nm = shape_names[(q - 1) % 3];
        if (q > 3) nm += std::to_string((q - 1) / 3);
        m.class_names.push_back(nm);
    }

    const std::string stem = to_string(domain);
    const int video_count = domain == ToyDomain::bridge_clear ? 2
                            : domain == ToyDomain::bridge_rain ? 3
                                                               : 0;
    for (int i = 0; i < n; ++i) {
        Image img;
        LabelImage lbl;
        render_toy_sample(cfg, domain, i, img, lbl);
        char suffix[32];
        std::snprintf(suffix, sizeof(suffix), "_%05d", i);
        const std::string img_path = (images / (stem + suffix + ".ppm")).string();
        const std::string lbl_path = (labels / (stem + suffix + ".pgm")).string();
        save_image(img, img_path);
        save_label(lbl, lbl_path);

        SampleRecord rec;
        rec.image_ref = img_path;
        rec.label_ref = lbl_path;
        rec.tags.weather = is_rain(domain) ? Weather::rain : Weather::clear;
        rec.tags.setup = is_bridge(domain) ? "cam-bridge"
                         : domain == ToyDomain::source_clear ? "cam-src"
                                                             : "cam-tgt";
        rec.tags.origin = Origin::original;
        if (video_count > 0) {
            rec.source_video = stem + "-vid" + std::to_string(i % video_count);
            rec.frame_index = i / video_count;
        }
        m.samples.push_back(std::move(rec));
    }
    return m;
}

}  // namespace rainshift::datasets
