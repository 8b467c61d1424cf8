#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nlmodes {

/// Shortest round-trip-safe decimal with 17 significant digits.
[[nodiscard]] std::string format_double(double v);

/// Comma-joined row of formatted doubles.
[[nodiscard]] std::string csv_row(std::span<const double> values);

/// Write `contents` to `path` via a temporary sibling file and rename, so
/// readers never see a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Parse a headed CSV of numbers. Returns the header names and rows.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    [[nodiscard]] std::size_t column(std::string_view name) const;
};
[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);

}  // namespace nlmodes
