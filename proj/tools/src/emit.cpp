#include "pdmforge/cli/emit.hpp"

#include "pdmforge/cli/commands.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

namespace pdm::cli {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), res.ptr};
}

void write_csv(const std::filesystem::path& path, const std::vector<CsvColumn>& columns) {
    if (columns.empty()) throw IoError("write_csv: no columns for " + path.string());
    const std::size_t rows = columns.front().values.size();
    for (const CsvColumn& c : columns) {
        if (c.values.size() != rows) throw IoError("write_csv: column '" + c.name + "' has a different length");
    }
    std::string out;
    out.reserve(rows * columns.size() * 24);
    for (std::size_t j = 0; j < columns.size(); ++j) out += (j ? "," : "") + columns[j].name;
    out += '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) {
            if (j) out += ',';
            out += format_double(columns[j].values[i]);
        }
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << out;
    if (!f) throw IoError("failed writing " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << text << '\n';
    if (!f) throw IoError("failed writing " + path.string());
}

} // namespace pdm::cli
