#pragma once

// CSV emission: comma-separated, header row, LF endings, floats in shortest
// round-trip form (at most 17 significant digits).

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pdm::cli {

/// Shortest decimal string that parses back to v; -0 is written as 0,
/// NaN as nan and infinities as inf / -inf.
std::string format_double(double v);

struct CsvColumn {
    std::string name;
    std::span<const double> values;
};

/// Writes equal-length columns. Throws IoError.
void write_csv(const std::filesystem::path& path, const std::vector<CsvColumn>& columns);

/// Writes text verbatim with a trailing LF. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace pdm::cli
