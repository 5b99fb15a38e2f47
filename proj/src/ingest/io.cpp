#include "strapsim/ingest/io.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "strapsim/error.hpp"
#include "strapsim/util/text.hpp"

namespace strapsim::ingest {
namespace {

std::string where(const CsvDocument& doc, const CsvRecord& rec) {
  return doc.source + ":" + std::to_string(rec.line);
}

void warn_adjustments(const SimilarityMatrix& m, const std::string& source) {
  const auto& adj = m.adjustments();
  if (adj.clamped > 0) spdlog::warn("{}: clamped {} cell(s) into [0, 1]", source, adj.clamped);
  if (adj.symmetrized > 0) spdlog::warn("{}: averaged {} near-symmetric pair(s)", source, adj.symmetrized);
  if (adj.diagonal_fixed > 0) spdlog::warn("{}: set {} diagonal cell(s) to 1", source, adj.diagonal_fixed);
}

}  // namespace

std::vector<WeightedSet> parse_holdings(const CsvDocument& doc, bool normalize) {
  const std::size_t pc = require_column(doc, "portfolio_id");
  const std::size_t cc = require_column(doc, "constituent_id");
  const std::size_t wc = require_column(doc, "weight");

  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::pair<std::string, double>>> entries;
  std::unordered_set<std::string> seen;
  for (const auto& rec : doc.records) {
    const std::string portfolio(util::trim(rec.cells[pc]));
    const std::string constituent(util::trim(rec.cells[cc]));
    if (portfolio.empty() || constituent.empty()) {
      throw Error(ErrorCode::ParseError, where(doc, rec) + ": empty portfolio or constituent id");
    }
    const auto weight = util::parse_double(rec.cells[wc]);
    if (!weight) {
      throw Error(ErrorCode::ParseError, where(doc, rec) + ": weight '" + rec.cells[wc] + "' is not a number");
    }
    if (*weight < 0.0) {
      throw Error(ErrorCode::NegativeWeight, where(doc, rec) + ": weight " + rec.cells[wc] + " is negative");
    }
    if (!seen.insert(portfolio + '\x1f' + constituent).second) {
      throw Error(ErrorCode::DuplicateHolding,
                  where(doc, rec) + ": (" + portfolio + ", " + constituent + ") already listed");
    }
    auto [it, fresh] = entries.try_emplace(portfolio);
    if (fresh) order.push_back(portfolio);
    it->second.emplace_back(constituent, *weight);
  }

  std::vector<WeightedSet> sets;
  sets.reserve(order.size());
  for (const auto& p : order) {
    try {
      sets.push_back(make_weighted_set(p, std::move(entries[p]), normalize));
    } catch (const Error& e) {
      throw Error(e.code(), doc.source + ": " + e.what());
    }
  }
  return sets;
}

std::vector<WeightedSet> load_holdings(const std::filesystem::path& path, bool normalize) {
  return parse_holdings(read_csv(path), normalize);
}

void write_holdings(std::ostream& out, std::span<const WeightedSet> sets) {
  out << "portfolio_id,constituent_id,weight\n";
  for (const auto& set : sets) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      const std::string cells[] = {set.label(), set.id(i).str(), util::format_weight(set.weight(i))};
      write_csv_row(out, cells);
    }
  }
}

SimilarityMatrix parse_matrix_csv(const CsvDocument& doc) {
  if (doc.header.size() < 2) throw Error(ErrorCode::ParseError, doc.source + ": matrix needs id columns");
  std::vector<std::string> cols(doc.header.begin() + 1, doc.header.end());
  std::vector<std::string> rows;
  std::vector<double> values;
  values.reserve(doc.records.size() * cols.size());
  for (const auto& rec : doc.records) {
    rows.emplace_back(util::trim(rec.cells[0]));
    for (std::size_t c = 1; c < rec.cells.size(); ++c) {
      const auto v = util::parse_double(rec.cells[c]);
      if (!v) {
        throw Error(ErrorCode::ParseError,
                    where(doc, rec) + ": cell '" + rec.cells[c] + "' is not a number");
      }
      values.push_back(*v);
    }
  }

  // Same ids in a different order: permute the columns into row order.
  const std::set<std::string> row_set(rows.begin(), rows.end());
  const std::set<std::string> col_set(cols.begin(), cols.end());
  if (rows != cols && row_set == col_set && row_set.size() == rows.size() && col_set.size() == cols.size()) {
    std::unordered_map<std::string, std::size_t> col_pos;
    for (std::size_t c = 0; c < cols.size(); ++c) col_pos[cols[c]] = c;
    std::vector<double> permuted(values.size());
    const std::size_t n = rows.size();
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) permuted[r * n + c] = values[r * n + col_pos[rows[c]]];
    values = std::move(permuted);
    cols = rows;
  }
  try {
    SimilarityMatrix m(std::move(rows), std::move(cols), std::move(values));
    warn_adjustments(m, doc.source);
    return m;
  } catch (const Error& e) {
    throw Error(e.code(), doc.source + ": " + e.what());
  }
}

SimilarityMatrix parse_matrix_json(std::string_view text, const std::string& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, source + ": " + e.what());
  }
  try {
    std::vector<std::string> rows;
    std::vector<std::string> cols;
    const bool self = doc.contains("ids");
    if (self) {
      rows = cols = doc.at("ids").get<std::vector<std::string>>();
    } else {
      rows = doc.at("row_ids").get<std::vector<std::string>>();
      cols = doc.at("col_ids").get<std::vector<std::string>>();
    }
    const auto& grid = doc.at("values");
    if (!grid.is_array() || grid.size() != rows.size()) {
      throw Error(self ? ErrorCode::NotSquareWhenSelfMode : ErrorCode::DimensionMismatch,
                  source + ": expected " + std::to_string(rows.size()) + " value rows");
    }
    std::vector<double> values;
    values.reserve(rows.size() * cols.size());
    for (const auto& line : grid) {
      if (!line.is_array() || line.size() != cols.size()) {
        throw Error(self ? ErrorCode::NotSquareWhenSelfMode : ErrorCode::DimensionMismatch,
                    source + ": every value row needs " + std::to_string(cols.size()) + " entries");
      }
      for (const auto& v : line) values.push_back(v.get<double>());
    }
    SimilarityMatrix m(std::move(rows), std::move(cols), std::move(values));
    warn_adjustments(m, source);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, source + ": " + e.what());
  } catch (const Error& e) {
    if (std::string_view(e.what()).find(source) != std::string_view::npos) throw;
    throw Error(e.code(), source + ": " + e.what());
  }
}

SimilarityMatrix load_matrix(const std::filesystem::path& path) {
  if (path.extension() == ".json") return parse_matrix_json(read_file(path), path.string());
  return parse_matrix_csv(read_csv(path));
}

void write_matrix_csv(std::ostream& out, const SimilarityMatrix& m) {
  std::vector<std::string> cells;
  cells.reserve(m.cols() + 1);
  cells.emplace_back("id");
  for (const auto& c : m.col_ids()) cells.push_back(c);
  write_csv_row(out, cells);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    cells.clear();
    cells.push_back(m.row_ids()[r]);
    for (double v : m.row(r)) cells.push_back(util::format_double(v));
    write_csv_row(out, cells);
  }
}

void write_matrix_json(std::ostream& out, const SimilarityMatrix& m) {
  nlohmann::json doc;
  if (m.is_self()) {
    doc["ids"] = m.row_ids();
  } else {
    doc["row_ids"] = m.row_ids();
    doc["col_ids"] = m.col_ids();
  }
  nlohmann::json grid = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    grid.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  }
  doc["values"] = std::move(grid);
  out << doc.dump() << '\n';
}

Period parse_period(std::string_view text) {
  text = util::trim(text);
  auto bad = [&] {
    return Error(ErrorCode::BadPeriodFormat, "period '" + std::string(text) + "' is not YYYY-MM");
  };
  if (text.size() != 7 || text[4] != '-') throw bad();
  for (std::size_t i : {0, 1, 2, 3, 5, 6}) {
    if (text[i] < '0' || text[i] > '9') throw bad();
  }
  const int year = std::stoi(std::string(text.substr(0, 4)));
  const int month = std::stoi(std::string(text.substr(5, 2)));
  if (month < 1 || month > 12) throw bad();
  return year * 12 + (month - 1);
}

std::string format_period(Period p) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", p / 12, p % 12 + 1);
  return buf;
}

std::vector<ReturnSeries> parse_returns(const CsvDocument& doc) {
  const std::size_t ec = require_column(doc, "entity_id");
  const std::size_t pc = require_column(doc, "period");
  const std::size_t rc = require_column(doc, "return");

  std::vector<ReturnSeries> out;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::map<Period, double>> points;
  for (const auto& rec : doc.records) {
    const std::string id(util::trim(rec.cells[ec]));
    if (id.empty()) throw Error(ErrorCode::ParseError, where(doc, rec) + ": empty entity id");
    Period period;
    try {
      period = parse_period(rec.cells[pc]);
    } catch (const Error& e) {
      throw Error(e.code(), where(doc, rec) + ": " + e.what());
    }
    const auto value = util::parse_double(rec.cells[rc]);
    if (!value) {
      throw Error(ErrorCode::ParseError, where(doc, rec) + ": return '" + rec.cells[rc] + "' is not a number");
    }
    auto [it, fresh] = index.try_emplace(id, out.size());
    if (fresh) {
      out.push_back({id, {}, {}});
      points.emplace_back();
    }
    if (!points[it->second].emplace(period, *value).second) {
      throw Error(ErrorCode::DuplicatePeriod,
                  where(doc, rec) + ": (" + id + ", " + format_period(period) + ") repeated");
    }
  }
  for (std::size_t s = 0; s < out.size(); ++s) {
    for (const auto& [p, v] : points[s]) {
      out[s].periods.push_back(p);
      out[s].returns.push_back(v);
    }
  }
  return out;
}

std::vector<ReturnSeries> load_returns(const std::filesystem::path& path) {
  return parse_returns(read_csv(path));
}

void write_returns(std::ostream& out, std::span<const ReturnSeries> series) {
  out << "entity_id,period,return\n";
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.periods.size(); ++k) {
      const std::string cells[] = {s.id, format_period(s.periods[k]), util::format_double(s.returns[k])};
      write_csv_row(out, cells);
    }
  }
}

}  // namespace strapsim::ingest
