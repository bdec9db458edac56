#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace socialwell::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a named column; throws naming the source when absent.
  std::size_t column(std::string_view name) const;
  std::string source;
};

/// Comma-separated values with a header line. Double-quoted fields may
/// contain commas and doubled quotes; every row must match the header width.
CsvTable read_csv(std::istream& in, const std::string& source);

std::string csv_escape(std::string_view field);

double parse_double(std::string_view text, const std::string& where);

/// 12 significant digits, shortest form ("%.12g").
std::string format_number(double value);

/// Rounds to 12 significant digits so serialized JSON stays diffable.
double round12(double value);

std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temporary file and rename, so readers never see a
/// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace socialwell::io
