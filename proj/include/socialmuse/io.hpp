// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace socialmuse::io {

using Json = nlohmann::json;

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view contents);
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Calls `fn(record, line_number)` for every non-blank line. Parse failures
/// and exceptions thrown by `fn` become Schema errors naming file and line.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t)>& fn);

/// Throws Schema("missing field") if absent.
const Json& field(const Json& record, std::string_view name);

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t value);

/// Shortest round-trip text for a double.
std::string format_double(double value);

/// Minimal CSV writer; fields never need quoting in our outputs.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);
  void header(const std::vector<std::string>& columns);
  CsvWriter& cell(std::string_view text);
  CsvWriter& cell(double value);
  CsvWriter& cell(long long value);
  CsvWriter& cell(int value) { return cell(static_cast<long long>(value)); }
  CsvWriter& cell(std::size_t value) { return cell(static_cast<long long>(value)); }
  void end_row();

 private:
  std::ofstream out_;
  bool first_ = true;
};

/// Parses a CSV file with a header row into string cells.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;  // throws Schema
};
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace socialmuse::io
