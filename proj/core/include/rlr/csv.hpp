#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace rlr {

/// Comma-separated table with a header row. Fields may be double-quoted.
struct CsvTable {
  std::filesystem::path source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lineNumbers;  // 1-based source line of each row

  /// Index of `name` in the header; throws LoadError if absent.
  std::size_t column(std::string_view name) const;
};

CsvTable readCsv(const std::filesystem::path& path);
CsvTable parseCsv(std::istream& in, const std::filesystem::path& source = "<stream>");

std::vector<std::string> splitCsvLine(std::string_view line);
std::string csvEscape(std::string_view field);

}  // namespace rlr
