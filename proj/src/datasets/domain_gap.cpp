#include "rainshift/datasets/domain_gap.hpp"

#include <cmath>

#include "rainshift/core/check.hpp"
#include "rainshift/core/image.hpp"

namespace rainshift::datasets {

namespace {
constexpr double kStdFloor = 1e-6;
}

ChannelStats compute_channel_stats(const DatasetManifest& m) {
    check(!m.samples.empty(), "channel stats: manifest " + m.name + " is empty");
    std::array<double, 3> sum{}, sumsq{};
    double count = 0;
    for (const auto& rec : m.samples) {
        const Image img = load_image(rec.image_ref);
        const size_t plane = static_cast<size_t>(img.h) * img.w;
        for (int ch = 0; ch < 3; ++ch) {
            const float* p = img.data.data() + ch * plane;
            for (size_t i = 0; i < plane; ++i) {
                sum[ch] += p[i];
                sumsq[ch] += static_cast<double>(p[i]) * p[i];
            }
        }
        count += static_cast<double>(plane);
    }
    ChannelStats st;
    for (int ch = 0; ch < 3; ++ch) {
        st.mean[ch] = sum[ch] / count;
        const double var = std::max(0.0, sumsq[ch] / count - st.mean[ch] * st.mean[ch]);
        st.std[ch] = std::sqrt(var);
        if (st.std[ch] < kStdFloor) {
            st.std[ch] = kStdFloor;
            st.degenerate = true;
        }
    }
    return st;
}

double symmetrized_gaussian_kl(double mean1, double std1, double mean2, double std2) {
    const double v1 = std1 * std1, v2 = std2 * std2;
    const double md2 = (mean1 - mean2) * (mean1 - mean2);
    return 0.5 * (v1 / v2 + v2 / v1 - 2.0) + 0.5 * md2 * (1.0 / v1 + 1.0 / v2);
}

DomainGapReport domain_gap_estimate(const DatasetManifest& s1, const DatasetManifest& s2) {
    check(!s1.samples.empty() && !s2.samples.empty(), "domain_gap_estimate: both sets must be non-empty");
    DomainGapReport rep;
    rep.s1 = compute_channel_stats(s1);
    rep.s2 = compute_channel_stats(s2);
    rep.degenerate_clamped = rep.s1.degenerate || rep.s2.degenerate;
    double acc = 0.0;
    for (int ch = 0; ch < 3; ++ch)
        acc += symmetrized_gaussian_kl(rep.s1.mean[ch], rep.s1.std[ch], rep.s2.mean[ch],
                                       rep.s2.std[ch]);
    rep.kl_proxy = acc / 3.0;
    return rep;
}

std::vector<std::vector<double>> pairwise_gap_table(const std::vector<DatasetManifest>& sets) {
    std::vector<ChannelStats> stats;
    stats.reserve(sets.size());
    for (const auto& s : sets) stats.push_back(compute_channel_stats(s));
    std::vector<std::vector<double>> table(sets.size(), std::vector<double>(sets.size(), 0.0));
    for (size_t i = 0; i < sets.size(); ++i) {
        for (size_t j = i + 1; j < sets.size(); ++j) {
            double acc = 0.0;
            for (int ch = 0; ch < 3; ++ch)
                acc += symmetrized_gaussian_kl(stats[i].mean[ch], stats[i].std[ch],
                                               stats[j].mean[ch], stats[j].std[ch]);
            table[i][j] = table[j][i] = acc / 3.0;
        }
    }
    return table;
}

}  // namespace rainshift::datasets
