#include "table.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "kbte/errors.hpp"

namespace kbte::cli {

std::vector<double> Table::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ValidationError("no column '" + name + "'");
  const auto c = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

bool Table::has_column(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::string Table::to_csv() const {
  std::string out;
  for (const auto& [k, v] : metadata) out += fmt::format("# {}={}\n", k, v);
  for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
  out += '\n';
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) out += fmt::format("{}{:.17g}", c ? "," : "", r[c]);
    out += '\n';
  }
  return out;
}

Table Table::from_csv(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, ',')) parts.push_back(cur);
    return parts;
  };
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError("metadata line without '='", n);
      t.metadata[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    if (t.columns.empty()) {
      t.columns = split(line);
      continue;
    }
    const auto parts = split(line);
    if (parts.size() != t.columns.size()) throw ParseError("row width does not match the header", n);
    std::vector<double> row(parts.size());
    for (std::size_t c = 0; c < parts.size(); ++c) {
      const std::string& p = parts[c];
      const auto r = std::from_chars(p.data(), p.data() + p.size(), row[c]);
      if (r.ec != std::errc() || r.ptr != p.data() + p.size()) {
        // from_chars rejects "inf"/"nan" spellings fmt may emit; strtod accepts them.
        char* end = nullptr;
        row[c] = std::strtod(p.c_str(), &end);
        if (end != p.c_str() + p.size()) throw ParseError("bad number '" + p + "'", n);
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw ParseError("missing header row");
  return t;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace kbte::cli
