#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "strapsim/core.hpp"
#include "strapsim/ingest/csv.hpp"

namespace strapsim::ingest {

/// Holdings CSV `portfolio_id,constituent_id,weight`: one set per portfolio,
/// portfolios and entries in file order.
/// Errors: SchemaMismatch, ParseError(line), DuplicateHolding(line), NegativeWeight(line).
std::vector<WeightedSet> parse_holdings(const CsvDocument& doc, bool normalize);
std::vector<WeightedSet> load_holdings(const std::filesystem::path& path, bool normalize);
void write_holdings(std::ostream& out, std::span<const WeightedSet> sets);

/// CSV with ids in the first row and column, or JSON {"ids": [...],
/// "values": [[...]]} (optionally "row_ids"/"col_ids" for rectangular
/// blocks). A CSV whose row and column ids are the same set is reordered into
/// self mode. Clamped cells are logged as a warning.
/// Errors: ParseError, NotSquareWhenSelfMode, AsymmetryBeyondTolerance, DuplicateId.
SimilarityMatrix parse_matrix_csv(const CsvDocument& doc);
SimilarityMatrix parse_matrix_json(std::string_view text, const std::string& source);
// Chooses the format from a ".json" extension.
SimilarityMatrix load_matrix(const std::filesystem::path& path);
void write_matrix_csv(std::ostream& out, const SimilarityMatrix& m);
void write_matrix_json(std::ostream& out, const SimilarityMatrix& m);

// Months since year 0, so consecutive months differ by one.
using Period = int;

// Errors: BadPeriodFormat unless the text is YYYY-MM with month 01..12.
Period parse_period(std::string_view text);
std::string format_period(Period p);

struct ReturnSeries {
  std::string id;
  std::vector<Period> periods;  // strictly increasing
  std::vector<double> returns;  // monthly, as fractions
};

/// Returns CSV `entity_id,period,return`; series in first-seen order, each
/// sorted by period. Errors: DuplicatePeriod, BadPeriodFormat, ParseError.
std::vector<ReturnSeries> parse_returns(const CsvDocument& doc);
std::vector<ReturnSeries> load_returns(const std::filesystem::path& path);
void write_returns(std::ostream& out, std::span<const ReturnSeries> series);

}  // namespace strapsim::ingest
