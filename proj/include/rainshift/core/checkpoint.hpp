#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rainshift {

// Versioned binary checkpoint blob: a JSON descriptor (model kind, shape
// hyperparameters) followed by named float tensors. Loaders reject blobs
// whose format version does not match kFormatVersion.
struct CheckpointBlob {
    static constexpr uint32_t kFormatVersion = 1;

    std::string descriptor_json;
    // name -> (dims, data); dims are stored verbatim.
    std::map<std::string, std::pair<std::vector<int>, std::vector<float>>> tensors;

    void add(const std::string& name, const std::vector<int>& dims,
             const std::vector<float>& data);
    const std::vector<float>& get(const std::string& name, const std::vector<int>& expect_dims) const;

    void save(const std::string& path) const;
    static CheckpointBlob load(const std::string& path);
};

}  // namespace rainshift
