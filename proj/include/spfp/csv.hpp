#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace spfp::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // data rows, header excluded
};

/// Splits one CSV record. Supports double-quoted fields with "" escapes.
std::vector<std::string> split_record(std::string_view line);

/// Reads a comma-separated file with a header row. Blank trailing lines are
/// skipped; every data row must have the header's field count.
Table read(const std::filesystem::path& path);

/// Strict numeric parse of a whole cell (surrounding blanks allowed).
bool parse_double(std::string_view cell, double& out);

}  // namespace spfp::csv
