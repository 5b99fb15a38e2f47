#include "strapsim/ingest/datasets.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>

#include "strapsim/error.hpp"
#include "strapsim/ingest/csv.hpp"
#include "strapsim/util/text.hpp"

namespace strapsim::ingest {
namespace {

void expect_rows(const std::string& source, std::size_t found, std::size_t published) {
  if (found != published) {
    spdlog::warn("{}: {} rows, published size is {}", source, found, published);
  }
}

constituent::RawTable raw_of(const CsvDocument& doc, const std::vector<std::size_t>& columns,
                             bool drop_missing, std::size_t* dropped) {
  constituent::RawTable raw;
  for (std::size_t c : columns) raw.header.push_back(doc.header[c]);
  for (const auto& rec : doc.records) {
    std::vector<std::string> row;
    bool missing = false;
    for (std::size_t c : columns) {
      std::string cell(util::trim(rec.cells[c]));
      if (cell == "?" || cell.empty()) missing = true;
      row.push_back(std::move(cell));
    }
    if (missing && drop_missing) {
      if (dropped) ++*dropped;
      continue;
    }
    raw.rows.push_back(std::move(row));
  }
  return raw;
}

constituent::FeatureTable encode_checked(const CsvDocument& doc, const constituent::RawTable& raw,
                                         const constituent::EncodeOptions& options) {
  try {
    auto table = constituent::encode(raw, options);
    table.validate();
    return table;
  } catch (const Error& e) {
    throw Error(e.code(), doc.source + ": " + e.what());
  }
}

// Every non-reserved column must be numeric in the built-in datasets.
void require_numeric(const CsvDocument& doc, const constituent::FeatureTable& table,
                     std::size_t expected_features) {
  if (table.cols() != expected_features) {
    throw Error(ErrorCode::SchemaMismatch, doc.source + ": expected " + std::to_string(expected_features) +
                                               " numeric features, found " + std::to_string(table.cols()));
  }
}

}  // namespace

constituent::FeatureTable load_iris(const std::filesystem::path& path) {
  const CsvDocument doc = read_csv(path);
  const std::vector<std::string> features{"sepal_length", "sepal_width", "petal_length", "petal_width"};
  std::vector<std::size_t> cols;
  for (const auto& f : features) cols.push_back(require_column(doc, f));
  cols.push_back(require_column(doc, "species"));
  const auto raw = raw_of(doc, cols, false, nullptr);
  constituent::EncodeOptions options;
  options.label_column = "species";
  auto table = encode_checked(doc, raw, options);
  require_numeric(doc, table, 4);
  expect_rows(doc.source, table.rows(), 150);
  return table;
}

constituent::FeatureTable load_breast_cancer(const std::filesystem::path& path) {
  const CsvDocument doc = read_csv(path);
  const std::vector<std::string> features{
      "clump_thickness",    "cell_size_uniformity", "cell_shape_uniformity",
      "marginal_adhesion",  "single_epithelial_cell_size", "bare_nuclei",
      "bland_chromatin",    "normal_nucleoli",      "mitoses"};
  std::vector<std::size_t> cols{require_column(doc, "id")};
  for (const auto& f : features) cols.push_back(require_column(doc, f));
  cols.push_back(require_column(doc, "class"));
  expect_rows(doc.source, doc.records.size(), 699);
  std::size_t dropped = 0;
  const auto raw = raw_of(doc, cols, true, &dropped);
  if (dropped > 0) spdlog::info("{}: dropped {} row(s) with missing cells", doc.source, dropped);
  // Sample ids repeat in the source file, so rows are keyed by position.
  constituent::EncodeOptions options;
  options.label_column = "class";
  options.drop_columns = {"id"};
  auto table = encode_checked(doc, raw, options);
  require_numeric(doc, table, 9);
  return table;
}

constituent::FeatureTable load_big_mac(const std::filesystem::path& path) {
  const CsvDocument doc = read_csv(path);
  if (doc.header.empty()) throw Error(ErrorCode::SchemaMismatch, doc.source + ": empty header");
  require_column(doc, "BigMac");
  std::vector<std::size_t> cols(doc.header.size());
  for (std::size_t c = 0; c < cols.size(); ++c) cols[c] = c;
  std::size_t dropped = 0;
  const auto raw = raw_of(doc, cols, true, &dropped);
  if (dropped > 0) spdlog::info("{}: dropped {} row(s) with missing cells", doc.source, dropped);
  constituent::EncodeOptions options;
  options.id_column = doc.header[0];
  options.target_columns = {"BigMac"};
  auto table = encode_checked(doc, raw, options);
  require_numeric(doc, table, doc.header.size() - 2);
  expect_rows(doc.source, table.rows(), 69);
  if (table.cols() != 9) spdlog::warn("{}: {} features, published count is 9", doc.source, table.cols());
  return table;
}

std::vector<Rating> load_ratings(const std::filesystem::path& path) {
  const CsvDocument doc = read_csv(path);
  const std::size_t uc = require_column(doc, "user_id");
  const std::size_t mc = require_column(doc, "movie_id");
  const std::size_t rc = require_column(doc, "rating");
  std::vector<Rating> out;
  out.reserve(doc.records.size());
  for (const auto& rec : doc.records) {
    const auto r = util::parse_double(rec.cells[rc]);
    if (!r || *r < 0.0) {
      throw Error(ErrorCode::ParseError, doc.source + ":" + std::to_string(rec.line) + ": rating '" +
                                             rec.cells[rc] + "' is not a non-negative number");
    }
    out.push_back({std::string(util::trim(rec.cells[uc])), std::string(util::trim(rec.cells[mc])), *r});
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> load_movie_corpus(const std::filesystem::path& path) {
  const CsvDocument doc = read_csv(path);
  const std::size_t ic = require_column(doc, "movie_id");
  const std::size_t dc = require_column(doc, "description");
  const std::size_t tc = require_column(doc, "tagline");
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(doc.records.size());
  for (const auto& rec : doc.records) {
    out.emplace_back(std::string(util::trim(rec.cells[ic])), rec.cells[dc] + " " + rec.cells[tc]);
  }
  return out;
}

constituent::FeatureTable load_feature_table(const std::filesystem::path& path,
                                             const constituent::EncodeOptions& options) {
  const CsvDocument doc = read_csv(path);
  std::vector<std::size_t> cols(doc.header.size());
  for (std::size_t c = 0; c < cols.size(); ++c) cols[c] = c;
  const auto raw = raw_of(doc, cols, false, nullptr);
  return encode_checked(doc, raw, options);
}

}  // namespace strapsim::ingest
