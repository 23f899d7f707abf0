#include "rainshift/datasets/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include "rainshift/core/check.hpp"
#include "rainshift/core/image.hpp"

namespace fs = std::filesystem;

namespace rainshift::datasets {

std::string to_string(Weather w) { return w == Weather::clear ? "clear" : "rain"; }
std::string to_string(Origin o) { return o == Origin::original ? "original" : "bridge"; }

Weather weather_from_string(const std::string& s) {
    if (s == "clear") return Weather::clear;
    if (s == "rain") return Weather::rain;
    throw ValidationError("unknown weather tag: " + s);
}

Origin origin_from_string(const std::string& s) {
    if (s == "original") return Origin::original;
    if (s == "bridge") return Origin::bridge;
    throw ValidationError("unknown origin tag: " + s);
}

bool DatasetManifest::has_sample(const std::string& image_ref) const {
    return std::any_of(samples.begin(), samples.end(),
                       [&](const SampleRecord& s) { return s.image_ref == image_ref; });
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> default_class_names() {
    std::vector<std::string> names;
    for (int i = 0; i < 19; ++i) names.push_back("class_" + std::to_string(i));
    return names;
}

struct KvLine {
    std::vector<std::pair<std::string, std::string>> fields;
};

KvLine parse_kv(const std::string& line, const std::string& where) {
    KvLine kv;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) {
        const auto eq = tok.find('=');
        check(eq != std::string::npos && eq > 0, where + ": malformed field '" + tok + "'");
        kv.fields.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
    }
    return kv;
}

std::string resolve(const fs::path& base, const std::string& ref) {
    fs::path p(ref);
    if (!p.is_absolute()) p = fs::absolute(base / p);
    return p.lexically_normal().string();
}

}  // namespace

DatasetManifest load_manifest(const std::string& path, bool validate_pixels) {
    std::ifstream in(path);
    check(in.good(), "cannot open manifest: " + path);
    const fs::path base = fs::path(path).parent_path();

    DatasetManifest m;
    m.name = fs::path(path).stem().string();
    m.class_names = default_class_names();

    std::unordered_set<std::string> seen_refs;
    std::string line;
    int lineno = 0;
    int record_count = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = path + ":" + std::to_string(lineno);
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line[0] == '#') {
            if (line.rfind("#!", 0) == 0) {
                const KvLine kv = parse_kv(line.substr(2), where);
                for (const auto& [k, v] : kv.fields) {
                    if (k == "name") {
                        m.name = v;
                    } else if (k == "classes") {
                        m.class_names = split(v, ',');
                        check(!m.class_names.empty() && !m.class_names[0].empty(),
                              where + ": empty class list");
                    } else {
                        throw ValidationError(where + ": unknown directive field '" + k + "'");
                    }
                }
            }
            continue;
        }

        const KvLine kv = parse_kv(line, where);
        SampleRecord rec;
        bool has_image = false, has_weather = false, has_setup = false;
        for (const auto& [k, v] : kv.fields) {
            if (k == "image") {
                rec.image_ref = resolve(base, v);
                has_image = true;
            } else if (k == "label") {
                rec.label_ref = resolve(base, v);
            } else if (k == "weather") {
                rec.tags.weather = weather_from_string(v);
                has_weather = true;
            } else if (k == "setup") {
                rec.tags.setup = v;
                has_setup = true;
            } else if (k == "origin") {
                rec.tags.origin = origin_from_string(v);
            } else if (k == "video") {
                rec.source_video = v;
            } else if (k == "frame") {
                const long f = std::stol(v);
                check(f >= 0, where + ": frame index must be nonnegative");
                rec.frame_index = f;
            } else {
                throw ValidationError(where + ": unknown field '" + k + "'");
            }
        }
        check(has_image, where + ": missing required field 'image'");
        check(has_weather, where + ": missing required field 'weather'");
        check(has_setup, where + ": missing required field 'setup'");
        check(!seen_refs.count(rec.image_ref), where + ": duplicate image ref " + rec.image_ref);
        seen_refs.insert(rec.image_ref);

        if (validate_pixels) {
            const Image img = load_image(rec.image_ref);
            if (!rec.label_ref.empty()) {
                const LabelImage lbl = load_label(rec.label_ref);
                check(lbl.h == img.h && lbl.w == img.w,
                      where + ": label size " + std::to_string(lbl.w) + "x" + std::to_string(lbl.h) +
                          " does not match image size " + std::to_string(img.w) + "x" +
                          std::to_string(img.h) + " for sample " + rec.image_ref);
                const int q = static_cast<int>(m.class_names.size());
                for (uint8_t v : lbl.data)
                    check(v < q || v == kIgnoreIndex,
                          where + ": class value " + std::to_string(int(v)) + " out of range for Q=" +
                              std::to_string(q) + " in sample " + rec.image_ref);
            }
        }
        m.samples.push_back(std::move(rec));
        ++record_count;
    }
    m.class_count = static_cast<int>(m.class_names.size());
    if (record_count == 0)
        std::cerr << "warning: manifest " << path << " contains no samples\n";
    return m;
}

void save_manifest(const DatasetManifest& m, const std::string& path) {
    std::ofstream out(path);
    check(out.good(), "cannot write manifest: " + path);
    const fs::path base = fs::absolute(fs::path(path)).parent_path();
    out << "#! name=" << m.name << " classes=";
    for (size_t i = 0; i < m.class_names.size(); ++i) {
        if (i) out << ',';
        out << m.class_names[i];
    }
    out << '\n';
    auto relativize = [&](const std::string& ref) {
        const fs::path rel = fs::path(ref).lexically_relative(base);
        if (!rel.empty() && rel.native().rfind("..", 0) != 0) return rel.string();
        return ref;
    };
    for (const auto& s : m.samples) {
        out << "image=" << relativize(s.image_ref);
        if (!s.label_ref.empty()) out << " label=" << relativize(s.label_ref);
        out << " weather=" << to_string(s.tags.weather) << " setup=" << s.tags.setup
            << " origin=" << to_string(s.tags.origin);
        if (!s.source_video.empty()) out << " video=" << s.source_video;
        if (s.frame_index) out << " frame=" << *s.frame_index;
        out << '\n';
    }
}

}  // namespace rainshift::datasets
