#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace strapsim {

// Remaining mass at or below this value counts as exhausted.
inline constexpr double kMassEpsilon = 1e-12;

class ConstituentId {
 public:
  ConstituentId() = default;
  explicit ConstituentId(std::string value) : value_(std::move(value)) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend bool operator==(const ConstituentId&, const ConstituentId&) = default;
  friend auto operator<=>(const ConstituentId&, const ConstituentId&) = default;

 private:
  std::string value_;
};

}  // namespace strapsim

template <>
struct std::hash<strapsim::ConstituentId> {
  std::size_t operator()(const strapsim::ConstituentId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};

namespace strapsim {

/// A labelled set of constituents with non-negative weights, kept in
/// insertion order. Every algorithm breaks ties by this order.
class WeightedSet {
 public:
  WeightedSet() = default;

  const std::string& label() const noexcept { return label_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  std::span<const ConstituentId> ids() const noexcept { return ids_; }
  std::span<const double> weights() const noexcept { return weights_; }
  const ConstituentId& id(std::size_t i) const { return ids_.at(i); }
  double weight(std::size_t i) const { return weights_.at(i); }

  double total_weight() const noexcept { return total_; }

  std::optional<std::size_t> find(const ConstituentId& id) const;
  std::optional<std::size_t> find(const std::string& id) const;
  // Zero when the id is absent.
  double weight_of(const ConstituentId& id) const;

  WeightedSet normalized() const;
  WeightedSet relabeled(std::string label) const;

  friend WeightedSet make_weighted_set(std::string label,
                                       std::vector<std::pair<std::string, double>> entries,
                                       bool normalize);

 private:
  std::string label_;
  std::vector<ConstituentId> ids_;
  std::vector<double> weights_;
  std::unordered_map<std::string, std::size_t> index_;
  double total_ = 0.0;
};

// Errors: EmptySet, NegativeWeight, DuplicateId.
WeightedSet make_weighted_set(std::string label,
                              std::vector<std::pair<std::string, double>> entries,
                              bool normalize);

/// Dense pairwise constituent scores in [0, 1]. When the row and column ids
/// coincide the matrix is in self mode: symmetric with a unit diagonal.
class SimilarityMatrix {
 public:
  struct Adjustments {
    std::size_t clamped = 0;       // cells moved into [0, 1]
    std::size_t symmetrized = 0;   // off-diagonal pairs averaged
    std::size_t diagonal_fixed = 0;
  };

  SimilarityMatrix() = default;

  // Values are row-major. Clamps into [0, 1]; in self mode averages
  // asymmetric pairs within `symmetry_tolerance` (error beyond it) and forces
  // the diagonal to 1.
  SimilarityMatrix(std::vector<std::string> row_ids, std::vector<std::string> col_ids,
                   std::vector<double> values, double symmetry_tolerance = 1e-6);

  static SimilarityMatrix square(std::vector<std::string> ids, std::vector<double> values,
                                 double symmetry_tolerance = 1e-6);

  std::size_t rows() const noexcept { return row_ids_.size(); }
  std::size_t cols() const noexcept { return col_ids_.size(); }
  bool is_self() const noexcept { return self_; }

  double at(std::size_t i, std::size_t j) const { return values_[i * col_ids_.size() + j]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * col_ids_.size(), col_ids_.size());
  }
  std::span<const double> values() const noexcept { return values_; }

  const std::vector<std::string>& row_ids() const noexcept { return row_ids_; }
  const std::vector<std::string>& col_ids() const noexcept { return col_ids_; }

  std::optional<std::size_t> find_row(const std::string& id) const;
  std::optional<std::size_t> find_col(const std::string& id) const;

  const Adjustments& adjustments() const noexcept { return adjustments_; }

  friend bool operator==(const SimilarityMatrix& a, const SimilarityMatrix& b) {
    return a.row_ids_ == b.row_ids_ && a.col_ids_ == b.col_ids_ && a.values_ == b.values_;
  }

 private:
  friend SimilarityMatrix align_matrix(const SimilarityMatrix&, const WeightedSet&,
                                       const WeightedSet&);
  struct Trusted {};
  SimilarityMatrix(Trusted, std::vector<std::string> row_ids, std::vector<std::string> col_ids,
                   std::vector<double> values);
  void build_index();

  std::vector<std::string> row_ids_;
  std::vector<std::string> col_ids_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> row_index_;
  std::unordered_map<std::string, std::size_t> col_index_;
  bool self_ = false;
  Adjustments adjustments_;
};

// |x| x |y| submatrix ordered as x's entries by y's entries.
// Errors: UnknownConstituent naming the first missing id.
SimilarityMatrix align_matrix(const SimilarityMatrix& matrix, const WeightedSet& x,
                              const WeightedSet& y);

struct MatchStep {
  std::size_t row = 0;
  std::size_t col = 0;
  double score = 0.0;
  double mass = 0.0;
  double contribution = 0.0;
};

struct MatchTrace {
  std::vector<MatchStep> steps;
  std::vector<double> residual_x;
  std::vector<double> residual_y;
  double total_score = 0.0;
  double total_residual = 0.0;
};

struct BertComponents {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  double residual_recall = 0.0;
  double residual_precision = 0.0;
  double residual_f1 = 0.0;
};

struct MetricResult {
  double score = 0.0;
  double residual = 0.0;
  std::optional<BertComponents> bert;
};

}  // namespace strapsim
