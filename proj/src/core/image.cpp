#include "rainshift/core/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "rainshift/core/check.hpp"

namespace rainshift {

namespace {

// Reads one whitespace-delimited token, skipping '#' comment lines.
std::string next_token(std::istream& in) {
    std::string tok;
    while (in >> tok) {
        if (tok[0] == '#') {
            std::string rest;
            std::getline(in, rest);
            continue;
        }
        return tok;
    }
    return {};
}

void read_pnm_header(std::istream& in, const std::string& path, const std::string& magic,
                     int& w, int& h) {
    check(next_token(in) == magic, path + ": not a " + magic + " file");
    w = std::stoi(next_token(in));
    h = std::stoi(next_token(in));
    const int maxval = std::stoi(next_token(in));
    check(w > 0 && h > 0, path + ": bad dimensions");
    check(maxval == 255, path + ": only 8-bit maxval 255 supported");
    in.get();  // single whitespace before raster
}

uint8_t to_byte(float v) {
    return static_cast<uint8_t>(std::lround(std::clamp(v, 0.f, 1.f) * 255.f));
}

}  // namespace

Image load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    check(in.good(), "cannot open image: " + path);
    int w = 0, h = 0;
    read_pnm_header(in, path, "P6", w, h);
    std::vector<uint8_t> raw(static_cast<size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    check(in.gcount() == static_cast<std::streamsize>(raw.size()), path + ": truncated raster");
    Image img(3, h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < 3; ++ch)
                img.at(ch, y, x) = raw[(static_cast<size_t>(y) * w + x) * 3 + ch] / 255.f;
    return img;
}

void save_image(const Image& img, const std::string& path) {
    check(img.c == 3, "save_image expects 3 channels, got " + std::to_string(img.c));
    std::ofstream out(path, std::ios::binary);
    check(out.good(), "cannot write image: " + path);
    out << "P6\n" << img.w << " " << img.h << "\n255\n";
    std::vector<uint8_t> raw(static_cast<size_t>(img.w) * img.h * 3);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            for (int ch = 0; ch < 3; ++ch)
                raw[(static_cast<size_t>(y) * img.w + x) * 3 + ch] = to_byte(img.at(ch, y, x));
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

LabelImage load_label(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    check(in.good(), "cannot open label: " + path);
    int w = 0, h = 0;
    read_pnm_header(in, path, "P5", w, h);
    LabelImage lbl(h, w);
    in.read(reinterpret_cast<char*>(lbl.data.data()), static_cast<std::streamsize>(lbl.data.size()));
    check(in.gcount() == static_cast<std::streamsize>(lbl.data.size()), path + ": truncated raster");
    return lbl;
}

void save_label(const LabelImage& lbl, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    check(out.good(), "cannot write label: " + path);
    out << "P5\n" << lbl.w << " " << lbl.h << "\n255\n";
    out.write(reinterpret_cast<const char*>(lbl.data.data()),
              static_cast<std::streamsize>(lbl.data.size()));
}

}  // namespace rainshift
