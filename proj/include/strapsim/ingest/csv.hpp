#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace strapsim::ingest {

struct CsvRecord {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> cells;
};

struct CsvDocument {
  std::string source;  // file name used in error messages
  std::vector<std::string> header;
  std::vector<CsvRecord> records;
};

/// RFC 4180 style: quoted fields may contain commas, doubled quotes and line
/// breaks; LF and CRLF endings; a UTF-8 byte order mark is skipped; blank
/// lines are ignored. Errors: ParseError with line number.
CsvDocument parse_csv(std::string_view text, std::string source = "<memory>");
// Errors: Io when the file cannot be read, then as parse_csv.
CsvDocument read_csv(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

// Quotes a cell only when it holds a comma, quote, or line break.
std::string csv_escape(std::string_view cell);
void write_csv_row(std::ostream& out, std::span<const std::string> cells);

// Column position by exact header name, or SchemaMismatch naming the file.
std::size_t require_column(const CsvDocument& doc, std::string_view name);

}  // namespace strapsim::ingest
