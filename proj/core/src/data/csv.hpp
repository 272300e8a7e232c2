#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hence::data::csv {

struct Row {
  std::size_t line{0};
  std::vector<std::string> fields;
};

struct Table {
  std::string name;
  std::vector<Row> rows;
};

/// Reads a comma-separated file with a mandatory header. Blank lines and
/// lines starting with '#' are skipped. Header mismatches and wrong field
/// counts are appended to `issues`.
std::optional<Table> read(const std::filesystem::path& path, const std::vector<std::string>& header,
                          std::vector<std::string>& issues);

std::string where(const Table& t, const Row& r);

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

}  // namespace hence::data::csv
