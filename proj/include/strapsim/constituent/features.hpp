#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "strapsim/core.hpp"

namespace strapsim::constituent {

/// Rectangular numeric table. Features are stored row-major; targets (numeric)
/// and class labels are optional side columns aligned with the rows.
struct FeatureTable {
  std::vector<std::string> row_ids;
  std::vector<std::string> feature_names;
  std::vector<double> values;

  std::vector<std::string> target_names;
  std::vector<double> targets;  // row-major, rows x target_names.size()

  std::vector<std::string> labels;  // empty when the table has no class column

  std::size_t rows() const noexcept { return row_ids.size(); }
  std::size_t cols() const noexcept { return feature_names.size(); }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values).subspan(r * cols(), cols());
  }
  std::vector<double> column(std::size_t c) const;
  std::optional<std::size_t> find_feature(const std::string& name) const;
  std::optional<std::size_t> find_target(const std::string& name) const;
  std::vector<double> target_column(std::size_t t) const;

  // Subset of rows, in the given order, carrying targets and labels along.
  FeatureTable select_rows(std::span<const std::size_t> picks) const;
  // Throws DimensionMismatch when the buffers disagree with the declared shape,
  // InvalidArgument on non-finite values.
  void validate() const;
};

// Errors: NonPositiveColumnMax naming the column.
FeatureTable max_scale(const FeatureTable& table);

/// Cosine similarity between feature columns, clamped to [0, 1] with a unit
/// diagonal. Expects max-scaled input. Errors: TooFewRows (< 2).
SimilarityMatrix feature_correlation_matrix(const FeatureTable& table);

// An instance as a weighted set over feature names, weights = cell values.
// Errors: EmptySet when every value is zero.
WeightedSet row_as_weighted_set(const FeatureTable& table, std::size_t r, bool normalize);

/// String-valued columns before encoding.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct EncodeOptions {
  std::string id_column;                    // empty: ids are row numbers
  std::vector<std::string> target_columns;  // numeric targets
  std::string label_column;                 // empty: no class labels
  std::vector<std::string> drop_columns;
};

/// Numeric columns pass through; any column holding a non-numeric cell is
/// one-hot encoded with one indicator per level (levels sorted, none
/// dropped), named "<column>=<level>".
/// Errors: TargetMissing, SchemaMismatch (ragged rows), ParseError for a
/// non-numeric target cell.
FeatureTable encode(const RawTable& raw, const EncodeOptions& options);

}  // namespace strapsim::constituent
