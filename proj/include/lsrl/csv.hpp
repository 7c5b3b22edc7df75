#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "lsrl/errors.hpp"

namespace lsrl {

// Plain-text metrics log: comma-separated columns, one row per call.
// Doubles are written with round-trip precision so identical runs produce
// identical files.
class CsvWriter {
public:
    CsvWriter() = default;
    CsvWriter(const std::string& path, const std::vector<std::string>& columns) { open(path, columns); }

    void open(const std::string& path, const std::vector<std::string>& columns) {
        f_.open(path, std::ios::trunc);
        if (!f_) throw DataError("cannot open log file: " + path);
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) f_ << ',';
            f_ << columns[i];
        }
        f_ << '\n';
    }

    bool is_open() const { return f_.is_open(); }

    static std::string num(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }
    static std::string num(std::uint64_t v) { return std::to_string(v); }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) f_ << ',';
            f_ << cells[i];
        }
        f_ << '\n';
        f_.flush();
    }

private:
    std::ofstream f_;
};

}  // namespace lsrl
