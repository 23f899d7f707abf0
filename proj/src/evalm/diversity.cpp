#include "rainshift/evalm/diversity.hpp"

#include <cmath>

#include "rainshift/core/check.hpp"
#include "rainshift/datasets/toyworld.hpp"

namespace rainshift::evalm {

double style_diversity(i2i::TranslatorModel& model, const std::vector<Image>& images,
                       int n_styles, Rng& rng) {
    check(n_styles >= 2, "style_diversity: need at least two styles");
    check(!images.empty(), "style_diversity: no images");
    double total = 0.0;
    for (const Image& img : images) {
        std::vector<Image> outs;
        outs.reserve(n_styles);
        for (int s = 0; s < n_styles; ++s)
            outs.push_back(
                i2i::translate(model, img, i2i::sample_style(model.spec().style_dim, rng)));
        double acc = 0.0;
        int pairs = 0;
        for (int i = 0; i < n_styles; ++i) {
            for (int j = i + 1; j < n_styles; ++j) {
                double l1 = 0.0;
                for (size_t k = 0; k < outs[i].data.size(); ++k)
                    l1 += std::abs(static_cast<double>(outs[i].data[k]) - outs[j].data[k]);
                acc += l1 / static_cast<double>(outs[i].data.size());
                ++pairs;
            }
        }
        total += acc / pairs;
    }
    return total / static_cast<double>(images.size());
}

DropletDetector::DropletDetector(double radius_min, double radius_max, double match_threshold)
    : threshold_(match_threshold) {
    check(radius_min >= 1.0 && radius_max >= radius_min,
          "DropletDetector: need 1 <= radius_min <= radius_max");
    // Half-pixel template spacing: the high-contrast rim makes the match
    // drop off quickly when the radius is off by a pixel.
    std::vector<double> radii;
    for (double r = radius_min; r < radius_max + 0.25; r += 0.5)
        radii.push_back(std::min(r, radius_max));
    for (const double radius : radii) {
        Template t;
        t.size = 2 * static_cast<int>(std::ceil(radius)) + 3;
        Image patch(3, t.size, t.size, 0.5f);
        datasets::render_droplet(patch, 0.5 * (t.size - 1), 0.5 * (t.size - 1), radius);

        t.values.resize(static_cast<size_t>(t.size) * t.size);
        double mean = 0.0;
        for (int y = 0; y < t.size; ++y)
            for (int x = 0; x < t.size; ++x) {
                const double g =
                    (patch.at(0, y, x) + patch.at(1, y, x) + patch.at(2, y, x)) / 3.0;
                t.values[y * t.size + x] = g;
                mean += g;
            }
        mean /= static_cast<double>(t.values.size());
        double norm = 0.0;
        for (auto& v : t.values) {
            v -= mean;
            norm += v * v;
        }
        norm = std::sqrt(norm);
        check(norm > 0, "DropletDetector: degenerate template");
        for (auto& v : t.values) v /= norm;
        templates_.push_back(std::move(t));
    }
}

double DropletDetector::max_response(const Image& img) const {
    check(img.c == 3, "DropletDetector: RGB image expected");
    std::vector<double> gray(static_cast<size_t>(img.h) * img.w);
    const size_t plane = static_cast<size_t>(img.h) * img.w;
    for (size_t i = 0; i < plane; ++i)
        gray[i] = (img.data[i] + img.data[plane + i] + img.data[2 * plane + i]) / 3.0;

    double best = 0.0;
    for (const Template& t : templates_) {
        if (img.h < t.size || img.w < t.size) continue;
        const int n = t.size * t.size;
        std::vector<double> patch(n);
        for (int y = 0; y + t.size <= img.h; ++y) {
            for (int x = 0; x + t.size <= img.w; ++x) {
                double mean = 0.0;
                for (int ty = 0; ty < t.size; ++ty)
                    for (int tx = 0; tx < t.size; ++tx) {
                        patch[ty * t.size + tx] = gray[(y + ty) * img.w + (x + tx)];
                        mean += patch[ty * t.size + tx];
                    }
                mean /= n;
                double dot = 0.0, norm = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double c = patch[i] - mean;
                    dot += c * t.values[i];
                    norm += c * c;
                }
                if (norm <= 1e-12) continue;
                best = std::max(best, dot / std::sqrt(norm));
            }
        }
    }
    return best;
}

double droplet_presence_rate(const std::vector<Image>& images, const DropletDetector& det) {
    check(!images.empty(), "droplet_presence_rate: no images");
    int hits = 0;
    for (const auto& img : images)
        if (det.contains_droplet(img)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(images.size());
}

}  // namespace rainshift::evalm
