#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "rainshift/core/check.hpp"

namespace rainshift {

// Comma-separated UTF-8 with a header row. Numeric formatting is fixed so
// that identical values always serialize to identical bytes.
class CsvWriter {
  public:
    CsvWriter() = default;
    CsvWriter(const std::string& path, const std::vector<std::string>& header) {
        open(path, header);
    }

    void open(const std::string& path, const std::vector<std::string>& header) {
        out_.open(path);
        check(out_.good(), "cannot open CSV for writing: " + path);
        columns_ = header.size();
        write_row(header);
    }

    bool is_open() const { return out_.is_open(); }

    void write_row(const std::vector<std::string>& fields) {
        if (!out_.is_open()) return;
        for (size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
    }

    void flush() { out_.flush(); }

    static std::string fmt(double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.9g", v);
        return buf;
    }
    static std::string fmt(int v) { return std::to_string(v); }
    static std::string fmt(long v) { return std::to_string(v); }
    static std::string fmt(size_t v) { return std::to_string(v); }

  private:
    std::ofstream out_;
    size_t columns_ = 0;
};

}  // namespace rainshift
