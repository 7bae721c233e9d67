// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#include "socialmuse/io.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "socialmuse/error.hpp"

namespace socialmuse {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid input";
    case ErrorCode::NotFound: return "not found";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Schema: return "schema error";
    case ErrorCode::NotReady: return "not ready";
    case ErrorCode::InvalidConfig: return "invalid config";
    case ErrorCode::MissingVocabulary: return "missing vocabulary";
    case ErrorCode::Internal: return "internal error";
  }
  return "unknown error";
}

namespace io {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(Json::parse(line), line_no);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::Schema,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

const Json& field(const Json& record, std::string_view name) {
  auto it = record.find(name);
  if (it == record.end()) {
    throw Error(ErrorCode::Schema, "missing field '" + std::string(name) + "'");
  }
  return *it;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw Error(ErrorCode::Internal, "double formatting failed");
  return {buf.data(), end};
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
  if (!out_) throw Error(ErrorCode::Io, "cannot write " + path.string());
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  for (const auto& c : columns) cell(c);
  end_row();
}

CsvWriter& CsvWriter::cell(std::string_view text) {
  if (!first_) out_ << ',';
  out_ << text;
  first_ = false;
  return *this;
}

CsvWriter& CsvWriter::cell(double value) { return cell(format_double(value)); }

CsvWriter& CsvWriter::cell(long long value) { return cell(std::to_string(value)); }

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw Error(ErrorCode::Schema, "missing CSV column '" + std::string(name) + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  auto lines = read_lines(path);
  CsvTable table;
  if (lines.empty()) throw Error(ErrorCode::Schema, path.string() + ": empty CSV file");
  table.columns = split(lines[0]);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto row = split(lines[i]);
    if (row.size() != table.columns.size()) {
      throw Error(ErrorCode::Schema, path.string() + ":" + std::to_string(i + 1) +
                                         ": expected " + std::to_string(table.columns.size()) +
                                         " cells");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace io
}  // namespace socialmuse
