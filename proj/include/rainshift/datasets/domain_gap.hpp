#pragma once

#include <array>
#include <vector>

#include "rainshift/datasets/manifest.hpp"

namespace rainshift::datasets {

struct ChannelStats {
    std::array<double, 3> mean{};
    std::array<double, 3> std{};
    bool degenerate = false;  // some channel std clamped to 1e-6
};

// Per-channel Gaussian fit of two sets plus their symmetrized KL. This is a
// diagnostic proxy on channel statistics, not a full distribution distance.
struct DomainGapReport {
    ChannelStats s1, s2;
    double kl_proxy = 0.0;
    bool degenerate_clamped = false;
};

ChannelStats compute_channel_stats(const DatasetManifest& m);

// Jeffreys divergence between the two channelwise Gaussian fits, averaged
// over channels.
double symmetrized_gaussian_kl(double mean1, double std1, double mean2, double std2);

DomainGapReport domain_gap_estimate(const DatasetManifest& s1, const DatasetManifest& s2);

// Pairwise kl_proxy values for a collection of sets (row i, col j).
std::vector<std::vector<double>> pairwise_gap_table(const std::vector<DatasetManifest>& sets);

}  // namespace rainshift::datasets
