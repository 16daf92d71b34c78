#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace lcmfit::app {

/// A CSV file held as strings: one header row and rows of equal width.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Position of a header name. Throws ParseError when absent.
  std::size_t column(const std::string& name) const;
};

/// RFC-4180 reader: comma separated, double-quoted fields may hold commas, line breaks
/// and doubled quotes; CRLF and LF line ends; a leading UTF-8 byte order mark is skipped.
/// Throws ParseError (with row and column) on unterminated quotes or ragged rows.
CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace lcmfit::app
