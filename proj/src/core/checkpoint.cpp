#include "rainshift/core/checkpoint.hpp"

#include <fstream>

#include "rainshift/core/check.hpp"

namespace rainshift {

namespace {

constexpr char kMagic[4] = {'R', 'S', 'C', 'K'};

template <typename T>
void write_pod(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::string& path) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    check(in.good(), path + ": truncated checkpoint");
    return v;
}

void write_string(std::ostream& out, const std::string& s) {
    write_pod<uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in, const std::string& path) {
    const auto n = read_pod<uint64_t>(in, path);
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    check(in.good(), path + ": truncated checkpoint");
    return s;
}

}  // namespace

void CheckpointBlob::add(const std::string& name, const std::vector<int>& dims,
                         const std::vector<float>& data) {
    size_t numel = 1;
    for (int d : dims) numel *= static_cast<size_t>(d);
    check(numel == data.size(), "checkpoint tensor " + name + ": dims do not match data size");
    check(!tensors.count(name), "checkpoint tensor " + name + ": duplicate name");
    tensors[name] = {dims, data};
}

const std::vector<float>& CheckpointBlob::get(const std::string& name,
                                              const std::vector<int>& expect_dims) const {
    auto it = tensors.find(name);
    check(it != tensors.end(), "checkpoint tensor missing: " + name);
    check(it->second.first == expect_dims, "checkpoint tensor " + name + ": shape mismatch");
    return it->second.second;
}

void CheckpointBlob::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    check(out.good(), "cannot write checkpoint: " + path);
    out.write(kMagic, 4);
    write_pod<uint32_t>(out, kFormatVersion);
    write_string(out, descriptor_json);
    write_pod<uint64_t>(out, tensors.size());
    for (const auto& [name, td] : tensors) {
        write_string(out, name);
        write_pod<uint32_t>(out, static_cast<uint32_t>(td.first.size()));
        for (int d : td.first) write_pod<int32_t>(out, d);
        write_pod<uint64_t>(out, td.second.size());
        out.write(reinterpret_cast<const char*>(td.second.data()),
                  static_cast<std::streamsize>(td.second.size() * sizeof(float)));
    }
    check(out.good(), "short write on checkpoint: " + path);
}

CheckpointBlob CheckpointBlob::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    check(in.good(), "cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    check(in.good() && std::equal(magic, magic + 4, kMagic), path + ": not a checkpoint file");
    const auto version = read_pod<uint32_t>(in, path);
    check(version == kFormatVersion,
          path + ": unsupported checkpoint format version " + std::to_string(version) +
              " (expected " + std::to_string(kFormatVersion) + ")");
    CheckpointBlob blob;
    blob.descriptor_json = read_string(in, path);
    const auto count = read_pod<uint64_t>(in, path);
    for (uint64_t i = 0; i < count; ++i) {
        const std::string name = read_string(in, path);
        const auto ndim = read_pod<uint32_t>(in, path);
        std::vector<int> dims(ndim);
        for (auto& d : dims) d = read_pod<int32_t>(in, path);
        const auto numel = read_pod<uint64_t>(in, path);
        std::vector<float> data(numel);
        in.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(numel * sizeof(float)));
        check(in.good(), path + ": truncated tensor data");
        blob.tensors[name] = {dims, std::move(data)};
    }
    return blob;
}

}  // namespace rainshift
