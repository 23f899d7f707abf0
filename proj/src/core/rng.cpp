#include "rainshift/core/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "rainshift/core/check.hpp"

namespace rainshift {

double Rng::normal() {
    // u1 in (0,1] so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::uniform_int(int n) {
    check(n > 0, "uniform_int: n must be positive");
    return static_cast<int>((static_cast<unsigned __int128>(next_u64()) *
                             static_cast<unsigned __int128>(n)) >> 64);
}

std::vector<int> Rng::permutation(int n) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = n - 1; i > 0; --i) {
        const int j = uniform_int(i + 1);
        std::swap(idx[i], idx[j]);
    }
    return idx;
}

std::string Rng::serialize() const {
    std::ostringstream os;
    os << eng_;
    return os.str();
}

void Rng::deserialize(const std::string& text) {
    std::istringstream is(text);
    is >> eng_;
    check(!is.fail(), "Rng::deserialize: malformed engine state");
}

}  // namespace rainshift
