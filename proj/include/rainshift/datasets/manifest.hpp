#pragma once

#include <optional>
#include <string>
#include <vector>

namespace rainshift::datasets {

enum class Weather { clear, rain };
enum class Origin { original, bridge };

std::string to_string(Weather w);
std::string to_string(Origin o);
Weather weather_from_string(const std::string& s);
Origin origin_from_string(const std::string& s);

// Weather membership plus the acquisition-setup identity that bridge
// selection matches on (camera/channel id at desk scale).
struct DomainTags {
    Weather weather = Weather::clear;
    std::string setup;
    Origin origin = Origin::original;
};

struct SampleRecord {
    std::string image_ref;                 // path, resolved against the manifest dir on load
    std::string label_ref;                 // empty when unlabeled
    DomainTags tags;
    std::string source_video;              // empty when not from a video
    std::optional<long> frame_index;
};

struct DatasetManifest {
    std::string name;
    int class_count = 0;
    std::vector<std::string> class_names;
    std::vector<SampleRecord> samples;

    bool has_sample(const std::string& image_ref) const;
};

// One record per line as whitespace-separated key=value fields:
//   image=imgs/a.ppm label=lbl/a.pgm weather=clear setup=cam0 origin=original video=v0 frame=3
// '#' starts a comment; the directive comment
//   #! name=<name> classes=<c0,c1,...>
// carries the dataset metadata. Without it, name falls back to the file
// stem and classes to the 19 generic segmentation classes.
//
// validate_pixels additionally opens every referenced file and checks the
// label raster against the image size and the class range.
DatasetManifest load_manifest(const std::string& path, bool validate_pixels = true);

void save_manifest(const DatasetManifest& m, const std::string& path);

}  // namespace rainshift::datasets
