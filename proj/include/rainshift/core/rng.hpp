#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace rainshift {

// Deterministic random source. Distributions are hand-rolled on top of the
// raw engine output so the sample stream has no hidden state beyond the
// engine itself, which keeps mid-run serialization exact.
class Rng {
  public:
    explicit Rng(uint64_t seed = 0) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; one sample per call, no cached spare.
    double normal();

    // Uniform integer in [0, n).
    int uniform_int(int n);

    // Fisher-Yates shuffle over indices 0..n-1.
    std::vector<int> permutation(int n);

    std::string serialize() const;
    void deserialize(const std::string& text);

  private:
    std::mt19937_64 eng_;
};

}  // namespace rainshift
