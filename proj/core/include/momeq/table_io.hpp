#pragma once

// Text serialization: CSV files with a header row, ',' separators, '.'
// decimals and LF line endings; numbers in shortest round-trip form.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "momeq/recursion.hpp"

namespace momeq {

/// Shortest decimal string that parses back to the same double; -0 is
/// written as 0.
std::string format_number(double value);

/// Throws IoError on anything but a complete decimal number.
double parse_number(std::string_view text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Writes header and rows; `comment` lines (if any) are emitted first,
/// each prefixed by "# ". Throws IoError when the file cannot be written.
void write_csv(const std::filesystem::path& path, const CsvTable& table,
               const std::vector<std::string>& comment = {});

/// Reads a CSV written by write_csv; lines starting with '#' are skipped.
/// Throws IoError on unreadable files or ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

/// Writes manifest.csv, one corr_k{k}_i{i}.csv per stored correlation
/// (columns y1..yi, c0..c{n-1}; zero correlations have no file) and
/// meta.json.
void write_table(const CorrectionTable& table, const std::filesystem::path& directory);

/// Rebuilds a table from write_table output. Throws IoError on missing or
/// inconsistent files.
CorrectionTable read_table(const std::filesystem::path& directory);

std::string to_string(GridKind kind);
GridKind grid_kind_from_string(const std::string& name);

}  // namespace momeq
