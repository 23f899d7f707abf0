#include "rainshift/datasets/bridge.hpp"

#include <set>
#include <unordered_set>

#include "rainshift/core/check.hpp"

namespace rainshift::datasets {

BridgeCompatibilityReport check_bridge_compatibility(const DatasetManifest& a,
                                                     const DatasetManifest& b,
                                                     const DatasetManifest& c,
                                                     const DatasetManifest& d) {
    BridgeCompatibilityReport rep;
    auto violation = [&rep](const std::string& msg) {
        rep.ok = false;
        rep.violations.push_back(msg);
    };

    if (a.class_count != b.class_count || a.class_count != c.class_count ||
        a.class_count != d.class_count)
        violation("class count differs across the four sets");

    for (const auto& s : c.samples)
        if (s.tags.weather != Weather::clear)
            violation("clear bridge set contains non-clear sample " + s.image_ref);
    for (const auto& s : d.samples)
        if (s.tags.weather != Weather::rain)
            violation("rain bridge set contains non-rain sample " + s.image_ref);

    std::set<std::string> setups_c, setups_d;
    for (const auto& s : c.samples) setups_c.insert(s.tags.setup);
    for (const auto& s : d.samples) setups_d.insert(s.tags.setup);
    // Both-empty means no bridge at all, which degenerates to the identity
    // union and is allowed.
    if (setups_c != setups_d)
        violation("setup mismatch: clear bridge setups {" + [&] {
            std::string out;
            for (const auto& s : setups_c) out += s + ",";
            return out;
        }() + "} vs rain bridge setups {" + [&] {
            std::string out;
            for (const auto& s : setups_d) out += s + ",";
            return out;
        }() + "}");

    return rep;
}

namespace {

void union_into(DatasetManifest& dst, const DatasetManifest& extra, bool retag_bridge,
                std::unordered_set<std::string>& seen) {
    for (const auto& s : extra.samples) {
        if (seen.count(s.image_ref)) continue;  // first occurrence wins
        seen.insert(s.image_ref);
        SampleRecord rec = s;
        if (retag_bridge) rec.tags.origin = Origin::bridge;
        dst.samples.push_back(std::move(rec));
    }
}

}  // namespace

std::pair<DatasetManifest, DatasetManifest> assemble_bridged_dataset(const DatasetManifest& a,
                                                                     const DatasetManifest& b,
                                                                     const DatasetManifest& c,
                                                                     const DatasetManifest& d) {
    const BridgeCompatibilityReport rep = check_bridge_compatibility(a, b, c, d);
    if (!rep.ok) {
        std::string msg = "bridge compatibility failed:";
        for (const auto& v : rep.violations) msg += "\n  - " + v;
        throw ValidationError(msg);
    }

    DatasetManifest ap;
    ap.name = a.name + "+bridge";
    ap.class_count = a.class_count;
    ap.class_names = a.class_names;
    std::unordered_set<std::string> seen_a;
    union_into(ap, a, false, seen_a);
    union_into(ap, c, true, seen_a);

    DatasetManifest bp;
    bp.name = b.name + "+bridge";
    bp.class_count = b.class_count;
    bp.class_names = b.class_names;
    std::unordered_set<std::string> seen_b;
    union_into(bp, b, false, seen_b);
    union_into(bp, d, true, seen_b);

    return {std::move(ap), std::move(bp)};
}

std::vector<long> subsample_video_frames(long frame_count, long target) {
    check(frame_count >= 1, "subsample_video_frames: frame count must be positive");
    check(target >= 1, "subsample_video_frames: target must be positive");
    check(target <= frame_count, "subsample_video_frames: cannot pick " + std::to_string(target) +
                                     " frames from " + std::to_string(frame_count));
    std::vector<long> idx(target);
    for (long i = 0; i < target; ++i) idx[i] = (i * frame_count) / target;
    return idx;
}

}  // namespace rainshift::datasets
