#include "rainshift/datasets/augment.hpp"

#include <algorithm>
#include <cmath>

#include "rainshift/core/check.hpp"

namespace rainshift::datasets {

namespace {

int scaled_extent(int n, double s) { return std::max(1, static_cast<int>(std::lround(n * s))); }

}  // namespace

AugmentParams sample_augment_params(const AugmentConfig& cfg, Rng& rng, int in_h, int in_w) {
    AugmentParams p;
    p.scale = cfg.scale_min + rng.uniform() * (cfg.scale_max - cfg.scale_min);
    p.flip = rng.uniform() < cfg.flip_prob;
    const int sh = scaled_extent(in_h, p.scale);
    const int sw = scaled_extent(in_w, p.scale);
    if (cfg.crop_h > 0) {
        p.off_y = sh > cfg.crop_h ? rng.uniform_int(sh - cfg.crop_h + 1) : 0;
        p.off_x = sw > cfg.crop_w ? rng.uniform_int(sw - cfg.crop_w + 1) : 0;
    }
    return p;
}

Image apply_augment_image(const Image& img, const AugmentParams& p, const AugmentConfig& cfg) {
    const int sh = scaled_extent(img.h, p.scale);
    const int sw = scaled_extent(img.w, p.scale);
    const int oh = cfg.crop_h > 0 ? cfg.crop_h : sh;
    const int ow = cfg.crop_w > 0 ? cfg.crop_w : sw;
    Image out(img.c, oh, ow, 0.f);
    const double sy = static_cast<double>(img.h) / sh;
    const double sx = static_cast<double>(img.w) / sw;
    for (int y = 0; y < oh; ++y) {
        const int gy = y + p.off_y;
        if (gy >= sh) continue;
        const double fy = std::clamp((gy + 0.5) * sy - 0.5, 0.0, img.h - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.h - 1);
        const float wy = static_cast<float>(fy - y0);
        for (int x = 0; x < ow; ++x) {
            int gx = x + p.off_x;
            if (gx >= sw) continue;
            if (p.flip) gx = sw - 1 - gx;
            const double fx = std::clamp((gx + 0.5) * sx - 0.5, 0.0, img.w - 1.0);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.w - 1);
            const float wx = static_cast<float>(fx - x0);
            for (int ch = 0; ch < img.c; ++ch) {
                const float top = (1.f - wx) * img.at(ch, y0, x0) + wx * img.at(ch, y0, x1);
                const float bot = (1.f - wx) * img.at(ch, y1, x0) + wx * img.at(ch, y1, x1);
                out.at(ch, y, x) = (1.f - wy) * top + wy * bot;
            }
        }
    }
    return out;
}

LabelImage apply_augment_label(const LabelImage& lbl, const AugmentParams& p,
                               const AugmentConfig& cfg) {
    const int sh = scaled_extent(lbl.h, p.scale);
    const int sw = scaled_extent(lbl.w, p.scale);
    const int oh = cfg.crop_h > 0 ? cfg.crop_h : sh;
    const int ow = cfg.crop_w > 0 ? cfg.crop_w : sw;
    LabelImage out(oh, ow, kIgnoreIndex);
    const double sy = static_cast<double>(lbl.h) / sh;
    const double sx = static_cast<double>(lbl.w) / sw;
    for (int y = 0; y < oh; ++y) {
        const int gy = y + p.off_y;
        if (gy >= sh) continue;
        const int py = std::clamp(static_cast<int>(std::lround((gy + 0.5) * sy - 0.5)), 0,
                                  lbl.h - 1);
        for (int x = 0; x < ow; ++x) {
            int gx = x + p.off_x;
            if (gx >= sw) continue;
            if (p.flip) gx = sw - 1 - gx;
            const int px = std::clamp(static_cast<int>(std::lround((gx + 0.5) * sx - 0.5)), 0,
                                      lbl.w - 1);
            out.at(y, x) = lbl.at(py, px);
        }
    }
    return out;
}

AugmentedSample augment_sample(const Image& img, const LabelImage* lbl, const AugmentConfig& cfg,
                               Rng& rng) {
    check(img.c > 0 && img.h > 0 && img.w > 0, "augment_sample: image required");
    AugmentedSample out;
    out.params = sample_augment_params(cfg, rng, img.h, img.w);
    out.image = apply_augment_image(img, out.params, cfg);
    if (lbl) out.label = apply_augment_label(*lbl, out.params, cfg);
    return out;
}

}  // namespace rainshift::datasets
