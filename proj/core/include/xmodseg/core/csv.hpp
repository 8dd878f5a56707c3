#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace xmodseg {

// Minimal CSV table: first row is the header. Values are written with
// enough digits to round-trip doubles exactly.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;
};

std::string format_double(double v);

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace xmodseg
