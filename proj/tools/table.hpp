#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace kbte::cli {

/// Numeric CSV with leading "# key=value" metadata lines.
struct Table {
  std::map<std::string, std::string> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  std::string to_csv() const;
  static Table from_csv(const std::string& text);
};

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace kbte::cli
