#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rainshift/datasets/manifest.hpp"

namespace rainshift::datasets {

struct BridgeCompatibilityReport {
    bool ok = true;
    std::vector<std::string> violations;
};

// Tag-level selection criteria for the auxiliary pair: clear-weather set C
// must match the source weather, rain set D the target weather, and C and D
// must share their full set of acquisition setups.
BridgeCompatibilityReport check_bridge_compatibility(const DatasetManifest& a,
                                                     const DatasetManifest& b,
                                                     const DatasetManifest& c,
                                                     const DatasetManifest& d);

// Unions A+C and B+D with duplicate image refs removed (first occurrence
// wins) and the auxiliary samples re-tagged origin=bridge. Throws on a
// failing compatibility report.
std::pair<DatasetManifest, DatasetManifest> assemble_bridged_dataset(const DatasetManifest& a,
                                                                     const DatasetManifest& b,
                                                                     const DatasetManifest& c,
                                                                     const DatasetManifest& d);

// Uniform subsampling of k frames from a video of N frames: floor(i*N/k).
std::vector<long> subsample_video_frames(long frame_count, long target);

}  // namespace rainshift::datasets
