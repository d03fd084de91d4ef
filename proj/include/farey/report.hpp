#pragma once

#include <concepts>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

namespace farey {

/// Floats are printed with 12 significant digits throughout the exports.
inline std::string fmt12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

/// Rounds to 12 significant digits, so JSON numbers serialize identically to
/// the CSV representation of the same value.
inline double sig12(double x) {
    return std::strtod(fmt12(x).c_str(), nullptr);
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open output file: " + path);
    }
    void header(const std::string& line) { out_ << line << "\n"; }
    void raw(const std::string& line) { out_ << line << "\n"; }
    template <typename... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << "\n";
    }

private:
    static std::string cell(double v) { return fmt12(v); }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }
    static std::string cell(std::integral auto v) { return std::to_string(v); }
    std::ofstream out_;
};

}  // namespace farey
