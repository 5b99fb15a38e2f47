#include "strapsim/core.hpp"

#include <algorithm>
#include <cmath>

#include "strapsim/error.hpp"

namespace strapsim {

std::optional<std::size_t> WeightedSet::find(const ConstituentId& id) const {
  return find(id.str());
}

std::optional<std::size_t> WeightedSet::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double WeightedSet::weight_of(const ConstituentId& id) const {
  auto idx = find(id);
  return idx ? weights_[*idx] : 0.0;
}

WeightedSet WeightedSet::normalized() const {
  WeightedSet out = *this;
  for (double& w : out.weights_) w /= total_;
  out.total_ = 0.0;
  for (double w : out.weights_) out.total_ += w;
  return out;
}

WeightedSet WeightedSet::relabeled(std::string label) const {
  WeightedSet out = *this;
  out.label_ = std::move(label);
  return out;
}

WeightedSet make_weighted_set(std::string label,
                              std::vector<std::pair<std::string, double>> entries,
                              bool normalize) {
  if (entries.empty()) throw Error(ErrorCode::EmptySet, "set '" + label + "' has no entries");

  WeightedSet set;
  set.label_ = std::move(label);
  set.ids_.reserve(entries.size());
  set.weights_.reserve(entries.size());
  set.index_.reserve(entries.size());

  double total = 0.0;
  for (auto& [id, weight] : entries) {
    if (id.empty()) throw Error(ErrorCode::InvalidArgument, "empty constituent id in '" + set.label_ + "'");
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
      throw Error(ErrorCode::NegativeWeight, "constituent '" + id + "' in '" + set.label_ +
                                                 "' has weight " + std::to_string(weight));
    }
    if (!set.index_.emplace(id, set.ids_.size()).second) {
      throw Error(ErrorCode::DuplicateId, "constituent '" + id + "' repeated in '" + set.label_ + "'");
    }
    set.ids_.emplace_back(std::move(id));
    set.weights_.push_back(weight);
    total += weight;
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::EmptySet, "set '" + set.label_ + "' has no positive weight");
  }

  if (normalize) {
    for (double& w : set.weights_) w /= total;
    total = 0.0;
    for (double w : set.weights_) total += w;
  }
  set.total_ = total;
  return set;
}

SimilarityMatrix::SimilarityMatrix(std::vector<std::string> row_ids,
                                   std::vector<std::string> col_ids, std::vector<double> values,
                                   double symmetry_tolerance)
    : row_ids_(std::move(row_ids)), col_ids_(std::move(col_ids)), values_(std::move(values)) {
  const std::size_t n = row_ids_.size();
  const std::size_t m = col_ids_.size();
  if (values_.size() != n * m) {
    throw Error(ErrorCode::DimensionMismatch,
                "matrix has " + std::to_string(values_.size()) + " values for " +
                    std::to_string(n) + "x" + std::to_string(m) + " ids");
  }
  self_ = row_ids_ == col_ids_;

  for (double& v : values_) {
    if (std::isnan(v)) {
      throw Error(ErrorCode::ParseError, "similarity matrix contains NaN");
    }
    if (v < 0.0 || v > 1.0) {
      v = std::clamp(v, 0.0, 1.0);
      ++adjustments_.clamped;
    }
  }

  if (self_) {
    for (std::size_t i = 0; i < n; ++i) {
      double& d = values_[i * n + i];
      if (d != 1.0) {
        d = 1.0;
        ++adjustments_.diagonal_fixed;
      }
      for (std::size_t j = i + 1; j < n; ++j) {
        double& a = values_[i * n + j];
        double& b = values_[j * n + i];
        if (a == b) continue;
        if (std::abs(a - b) > symmetry_tolerance) {
          throw Error(ErrorCode::AsymmetryBeyondTolerance,
                      "entries (" + row_ids_[i] + ", " + row_ids_[j] + ") differ by " +
                          std::to_string(std::abs(a - b)));
        }
        const double mean = 0.5 * (a + b);
        a = mean;
        b = mean;
        ++adjustments_.symmetrized;
      }
    }
  }
  build_index();
}

SimilarityMatrix SimilarityMatrix::square(std::vector<std::string> ids, std::vector<double> values,
                                          double symmetry_tolerance) {
  std::vector<std::string> cols = ids;
  return SimilarityMatrix(std::move(ids), std::move(cols), std::move(values), symmetry_tolerance);
}

SimilarityMatrix::SimilarityMatrix(Trusted, std::vector<std::string> row_ids,
                                   std::vector<std::string> col_ids, std::vector<double> values)
    : row_ids_(std::move(row_ids)), col_ids_(std::move(col_ids)), values_(std::move(values)) {
  self_ = row_ids_ == col_ids_;
  build_index();
}

void SimilarityMatrix::build_index() {
  row_index_.clear();
  col_index_.clear();
  row_index_.reserve(row_ids_.size());
  for (std::size_t i = 0; i < row_ids_.size(); ++i) {
    if (!row_index_.emplace(row_ids_[i], i).second) {
      throw Error(ErrorCode::DuplicateId, "matrix row id '" + row_ids_[i] + "' repeated");
    }
  }
  col_index_.reserve(col_ids_.size());
  for (std::size_t j = 0; j < col_ids_.size(); ++j) {
    if (!col_index_.emplace(col_ids_[j], j).second) {
      throw Error(ErrorCode::DuplicateId, "matrix column id '" + col_ids_[j] + "' repeated");
    }
  }
}

std::optional<std::size_t> SimilarityMatrix::find_row(const std::string& id) const {
  auto it = row_index_.find(id);
  if (it == row_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> SimilarityMatrix::find_col(const std::string& id) const {
  auto it = col_index_.find(id);
  if (it == col_index_.end()) return std::nullopt;
  return it->second;
}

namespace {

// Maps each id of `set` through `lookup`; returns the first missing id on failure.
template <typename Lookup>
std::optional<std::string> resolve(const WeightedSet& set, Lookup lookup,
                                   std::vector<std::size_t>& out) {
  out.clear();
  out.reserve(set.size());
  for (const auto& id : set.ids()) {
    auto idx = lookup(id.str());
    if (!idx) return id.str();
    out.push_back(*idx);
  }
  return std::nullopt;
}

}  // namespace

SimilarityMatrix align_matrix(const SimilarityMatrix& matrix, const WeightedSet& x,
                              const WeightedSet& y) {
  auto by_row = [&](const std::string& id) { return matrix.find_row(id); };
  auto by_col = [&](const std::string& id) { return matrix.find_col(id); };

  std::vector<std::size_t> xi;
  std::vector<std::size_t> yj;
  bool transposed = false;
  auto missing = resolve(x, by_row, xi);
  if (!missing) missing = resolve(y, by_col, yj);
  if (missing && !matrix.is_self()) {
    // Rectangular matrices may be supplied with the sets on swapped axes.
    std::vector<std::size_t> xt;
    std::vector<std::size_t> yt;
    if (!resolve(x, by_col, xt) && !resolve(y, by_row, yt)) {
      xi = std::move(xt);
      yj = std::move(yt);
      transposed = true;
      missing.reset();
    }
  }
  if (missing) {
    throw Error(ErrorCode::UnknownConstituent, *missing);
  }

  std::vector<double> values(x.size() * y.size());
  for (std::size_t a = 0; a < xi.size(); ++a) {
    for (std::size_t b = 0; b < yj.size(); ++b) {
      values[a * yj.size() + b] = transposed ? matrix.at(yj[b], xi[a]) : matrix.at(xi[a], yj[b]);
    }
  }

  std::vector<std::string> rows;
  std::vector<std::string> cols;
  rows.reserve(x.size());
  cols.reserve(y.size());
  for (const auto& id : x.ids()) rows.push_back(id.str());
  for (const auto& id : y.ids()) cols.push_back(id.str());
  return SimilarityMatrix(SimilarityMatrix::Trusted{}, std::move(rows), std::move(cols),
                          std::move(values));
}

}  // namespace strapsim
