#pragma once

#include <stdexcept>
#include <string>

namespace rainshift {

// Thrown on contract violations (bad arguments, malformed files, shape
// mismatches). The CLI maps these to exit code 1.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on failures during execution (non-finite losses, I/O mid-run).
// The CLI maps these to exit code 2.
struct RuntimeFailure : std::runtime_error {
    explicit RuntimeFailure(const std::string& msg) : std::runtime_error(msg) {}
};

inline void check(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}

}  // namespace rainshift
