#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "common.hpp"

namespace debtctrl {

// Shortest round-trip decimal form; locale-independent, so output bytes are
// identical across runs and machines.
inline std::string format_real(Real v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline void ensure_parent_dir(const std::filesystem::path& file) {
    std::error_code ec;
    const auto parent = file.parent_path();
    if (parent.empty()) return;
    std::filesystem::create_directories(parent, ec);
    if (ec) fail(errc::io_failure, "cannot create directory " + parent.string());
}

inline void write_text_file(const std::filesystem::path& file, const std::string& content) {
    ensure_parent_dir(file);
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) fail(errc::io_failure, "cannot open " + file.string() + " for writing");
    out << content;
    if (!out) fail(errc::io_failure, "write failed for " + file.string());
}

inline std::string render_csv(const std::string& header,
                              const std::vector<std::vector<Real>>& rows) {
    std::string text = header;
    text += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) text += ',';
            text += format_real(row[i]);
        }
        text += '\n';
    }
    return text;
}

inline void write_csv(const std::filesystem::path& file, const std::string& header,
                      const std::vector<std::vector<Real>>& rows) {
    write_text_file(file, render_csv(header, rows));
}

}  // namespace debtctrl
