#include "strapsim/constituent/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "strapsim/error.hpp"
#include "strapsim/simd/kernels.hpp"
#include "strapsim/util/text.hpp"

namespace strapsim::constituent {

std::vector<double> FeatureTable::column(std::size_t c) const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
  return out;
}

std::optional<std::size_t> FeatureTable::find_feature(const std::string& name) const {
  auto it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - feature_names.begin());
}

std::optional<std::size_t> FeatureTable::find_target(const std::string& name) const {
  auto it = std::find(target_names.begin(), target_names.end(), name);
  if (it == target_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - target_names.begin());
}

std::vector<double> FeatureTable::target_column(std::size_t t) const {
  const std::size_t width = target_names.size();
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = targets[r * width + t];
  return out;
}

FeatureTable FeatureTable::select_rows(std::span<const std::size_t> picks) const {
  FeatureTable out;
  out.feature_names = feature_names;
  out.target_names = target_names;
  const std::size_t width = target_names.size();
  out.row_ids.reserve(picks.size());
  out.values.reserve(picks.size() * cols());
  for (std::size_t r : picks) {
    out.row_ids.push_back(row_ids.at(r));
    const auto src = row(r);
    out.values.insert(out.values.end(), src.begin(), src.end());
    for (std::size_t t = 0; t < width; ++t) out.targets.push_back(targets[r * width + t]);
    if (!labels.empty()) out.labels.push_back(labels[r]);
  }
  return out;
}

void FeatureTable::validate() const {
  if (values.size() != rows() * cols() || targets.size() != rows() * target_names.size() ||
      (!labels.empty() && labels.size() != rows())) {
    throw Error(ErrorCode::DimensionMismatch, "feature table buffers disagree with its shape");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "feature table holds a non-finite value");
  }
}

FeatureTable max_scale(const FeatureTable& table) {
  table.validate();
  FeatureTable out = table;
  const std::size_t n = table.cols();
  for (std::size_t c = 0; c < n; ++c) {
    double top = -INFINITY;
    for (std::size_t r = 0; r < table.rows(); ++r) top = std::max(top, table.at(r, c));
    if (!(top > 0.0)) {
      throw Error(ErrorCode::NonPositiveColumnMax,
                  "column '" + table.feature_names[c] + "' has maximum " + util::format_double(top));
    }
    for (std::size_t r = 0; r < table.rows(); ++r) out.values[r * n + c] /= top;
  }
  return out;
}

SimilarityMatrix feature_correlation_matrix(const FeatureTable& table) {
  table.validate();
  if (table.rows() < 2) {
    throw Error(ErrorCode::TooFewRows, "need at least 2 rows, got " + std::to_string(table.rows()));
  }
  const std::size_t p = table.cols();
  std::vector<std::vector<double>> columns(p);
  std::vector<double> norms(p);
  const auto& k = simd::kernels();
  for (std::size_t c = 0; c < p; ++c) {
    columns[c] = table.column(c);
    norms[c] = std::sqrt(k.dot(columns[c].data(), columns[c].data(), table.rows()));
  }
  std::vector<double> values(p * p, 0.0);
  for (std::size_t a = 0; a < p; ++a) {
    values[a * p + a] = 1.0;
    for (std::size_t b = a + 1; b < p; ++b) {
      double cosine = 0.0;
      if (norms[a] > 0.0 && norms[b] > 0.0) {
        cosine = k.dot(columns[a].data(), columns[b].data(), table.rows()) / (norms[a] * norms[b]);
      }
      values[a * p + b] = values[b * p + a] = std::clamp(cosine, 0.0, 1.0);
    }
  }
  return SimilarityMatrix::square(table.feature_names, std::move(values));
}

WeightedSet row_as_weighted_set(const FeatureTable& table, std::size_t r, bool normalize) {
  std::vector<std::pair<std::string, double>> entries;
  entries.reserve(table.cols());
  const auto values = table.row(r);
  for (std::size_t c = 0; c < table.cols(); ++c) entries.emplace_back(table.feature_names[c], values[c]);
  return make_weighted_set(table.row_ids.at(r), std::move(entries), normalize);
}

FeatureTable encode(const RawTable& raw, const EncodeOptions& options) {
  const std::size_t width = raw.header.size();
  auto column_of = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(raw.header.begin(), raw.header.end(), name);
    if (it == raw.header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - raw.header.begin());
  };
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    if (raw.rows[r].size() != width) {
      throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(r + 1) + " has " +
                                                 std::to_string(raw.rows[r].size()) +
                                                 " cells, header has " + std::to_string(width));
    }
  }

  std::set<std::size_t> reserved;
  std::optional<std::size_t> id_col;
  if (!options.id_column.empty()) {
    id_col = column_of(options.id_column);
    if (!id_col) throw Error(ErrorCode::SchemaMismatch, "id column '" + options.id_column + "' not found");
    reserved.insert(*id_col);
  }
  std::optional<std::size_t> label_col;
  if (!options.label_column.empty()) {
    label_col = column_of(options.label_column);
    if (!label_col) throw Error(ErrorCode::TargetMissing, "label column '" + options.label_column + "' not found");
    reserved.insert(*label_col);
  }
  std::vector<std::size_t> target_cols;
  for (const auto& name : options.target_columns) {
    auto c = column_of(name);
    if (!c) throw Error(ErrorCode::TargetMissing, "target column '" + name + "' not found");
    target_cols.push_back(*c);
    reserved.insert(*c);
  }
  for (const auto& name : options.drop_columns) {
    if (auto c = column_of(name)) reserved.insert(*c);
  }

  FeatureTable out;
  out.target_names = options.target_columns;
  const std::size_t n = raw.rows.size();
  out.row_ids.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    out.row_ids.push_back(id_col ? raw.rows[r][*id_col] : std::to_string(r));
    if (label_col) out.labels.push_back(std::string(util::trim(raw.rows[r][*label_col])));
    for (std::size_t c : target_cols) {
      auto v = util::parse_double(raw.rows[r][c]);
      if (!v) {
        throw Error(ErrorCode::ParseError, "row " + std::to_string(r + 1) + ": target '" +
                                               raw.header[c] + "' is not numeric");
      }
      out.targets.push_back(*v);
    }
  }

  // Per source column: either a numeric feature or a block of indicators.
  struct Plan {
    std::size_t source;
    bool numeric;
    std::vector<std::string> levels;
  };
  std::vector<Plan> plans;
  for (std::size_t c = 0; c < width; ++c) {
    if (reserved.count(c)) continue;
    bool numeric = true;
    std::set<std::string> levels;
    for (const auto& row : raw.rows) {
      const std::string cell(util::trim(row[c]));
      if (numeric && !util::parse_double(cell)) numeric = false;
      levels.insert(cell);
    }
    Plan plan{c, numeric, {}};
    if (numeric) {
      out.feature_names.push_back(raw.header[c]);
    } else {
      plan.levels.assign(levels.begin(), levels.end());
      for (const auto& level : plan.levels) out.feature_names.push_back(raw.header[c] + "=" + level);
    }
    plans.push_back(std::move(plan));
  }

  out.values.reserve(n * out.feature_names.size());
  for (const auto& row : raw.rows) {
    for (const auto& plan : plans) {
      const std::string cell(util::trim(row[plan.source]));
      if (plan.numeric) {
        out.values.push_back(*util::parse_double(cell));
      } else {
        for (const auto& level : plan.levels) out.values.push_back(level == cell ? 1.0 : 0.0);
      }
    }
  }
  return out;
}

}  // namespace strapsim::constituent
