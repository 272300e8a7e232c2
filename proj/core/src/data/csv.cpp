#include "csv.hpp"

#include <fstream>
#include <sstream>

namespace hence::data::csv {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::optional<Table> read(const std::filesystem::path& path, const std::vector<std::string>& header,
                          std::vector<std::string>& issues) {
  Table table;
  table.name = path.filename().string();
  std::ifstream in(path);
  if (!in) {
    issues.push_back("missing file " + path.string());
    return std::nullopt;
  }
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto fields = split(view);
    if (!have_header) {
      if (line_no == 1 && !fields.empty() && fields.front().rfind("\xEF\xBB\xBF", 0) == 0) {
        fields.front().erase(0, 3);
      }
      if (fields != header) {
        std::string expected;
        for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
        issues.push_back(table.name + ":" + std::to_string(line_no) + ": header must be '" +
                         expected + "'");
        return std::nullopt;
      }
      have_header = true;
      continue;
    }
    if (fields.size() != header.size()) {
      issues.push_back(table.name + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
      continue;
    }
    table.rows.push_back({line_no, std::move(fields)});
  }
  if (!have_header) {
    issues.push_back(table.name + ": missing header");
    return std::nullopt;
  }
  return table;
}

std::string where(const Table& t, const Row& r) { return t.name + ":" + std::to_string(r.line) + ": "; }

}  // namespace hence::data::csv
