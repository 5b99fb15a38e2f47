#include "strapsim/ingest/csv.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include "strapsim/error.hpp"

namespace strapsim::ingest {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "failed reading '" + path.string() + "'");
  return std::move(buf).str();
}

CsvDocument parse_csv(std::string_view text, std::string source) {
  CsvDocument doc;
  doc.source = std::move(source);
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<std::vector<std::string>> raw;
  std::vector<std::size_t> lines;
  std::vector<std::string> record;
  std::string cell;
  bool quoted = false;
  bool cell_was_quoted = false;
  bool record_has_content = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_cell = [&] {
    record.push_back(std::move(cell));
    cell.clear();
    cell_was_quoted = false;
  };
  auto end_record = [&] {
    end_cell();
    if (record_has_content) {
      raw.push_back(std::move(record));
      lines.push_back(record_line);
    }
    record.clear();
    record_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        cell.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!cell.empty() || cell_was_quoted) {
          throw Error(ErrorCode::ParseError,
                      doc.source + ":" + std::to_string(line) + ": stray quote inside a field");
        }
        quoted = true;
        cell_was_quoted = true;
        record_has_content = true;
        break;
      case ',':
        end_cell();
        record_has_content = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        if (cell_was_quoted) {
          throw Error(ErrorCode::ParseError,
                      doc.source + ":" + std::to_string(line) + ": text after closing quote");
        }
        cell.push_back(c);
        record_has_content = true;
    }
  }
  if (quoted) {
    throw Error(ErrorCode::ParseError, doc.source + ":" + std::to_string(record_line) + ": unterminated quote");
  }
  end_record();

  if (raw.empty()) throw Error(ErrorCode::SchemaMismatch, doc.source + ": missing header row");
  doc.header = std::move(raw.front());
  for (std::size_t r = 1; r < raw.size(); ++r) {
    if (raw[r].size() != doc.header.size()) {
      throw Error(ErrorCode::ParseError, doc.source + ":" + std::to_string(lines[r]) + ": expected " +
                                             std::to_string(doc.header.size()) + " fields, found " +
                                             std::to_string(raw[r].size()));
    }
    doc.records.push_back({lines[r], std::move(raw[r])});
  }
  return doc;
}

CsvDocument read_csv(const std::filesystem::path& path) {
  return parse_csv(read_file(path), path.string());
}

std::string csv_escape(std::string_view cell) {
  if (cell.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_csv_row(std::ostream& out, std::span<const std::string> cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(cells[i]);
  }
  out << '\n';
}

std::size_t require_column(const CsvDocument& doc, std::string_view name) {
  auto it = std::find(doc.header.begin(), doc.header.end(), name);
  if (it == doc.header.end()) {
    throw Error(ErrorCode::SchemaMismatch, doc.source + ": missing column '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - doc.header.begin());
}

}  // namespace strapsim::ingest
