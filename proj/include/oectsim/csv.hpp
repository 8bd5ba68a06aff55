#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace oectsim {

// Malformed row or header in a CSV file; line is 1-based.
class CsvParseError : public std::runtime_error {
  public:
    CsvParseError(const std::filesystem::path& path, std::size_t line, const std::string& what);

    std::size_t line;
};

// All numeric output uses 9 significant digits in scientific notation,
// locale-independent.
std::string format_sci(double value);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::map<std::string, std::string> metadata;  // leading "# key=value" lines
};

// Writes "#"-prefixed metadata lines, a header row, then data rows.
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Strict reader for the toolkit's own files: every row must parse as
// doubles and match the header width.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace oectsim
