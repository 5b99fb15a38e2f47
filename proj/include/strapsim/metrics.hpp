#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "strapsim/core.hpp"

namespace strapsim::metrics {

enum class Metric { Jaccard, WeightedJaccard, BertScore, Strapsim };

inline constexpr std::array<Metric, 4> kAllMetrics{Metric::Jaccard, Metric::WeightedJaccard,
                                                   Metric::BertScore, Metric::Strapsim};

std::string_view name(Metric metric) noexcept;
// Accepts the names produced by name(); throws InvalidArgument otherwise.
Metric parse_metric(std::string_view text);
bool needs_similarity(Metric metric) noexcept;

struct StrapsimOptions {
  // Pairs scoring below this never exchange mass. Zero-score pairs are never
  // eligible: mass without a similar counterpart stays in the residual.
  double min_match_sim = 0.0;
};

// Row-major read-only view over an aligned |x| x |y| score block.
struct MatrixView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  double operator()(std::size_t i, std::size_t j) const noexcept { return data[i * cols + j]; }
  static MatrixView of(const SimilarityMatrix& m) noexcept {
    return {m.values().data(), m.rows(), m.cols()};
  }
};

/// Residual-aware greedy matching. Pairs are visited by descending score
/// (ties by ascending row, then column); each visit moves the smaller of the
/// two remaining masses and credits mass * score. Matching ends when either
/// side has no mass above kMassEpsilon or the pairs run out.
///
/// `s` must already be aligned to x by y (see align_matrix).
/// Errors: DimensionMismatch.
MatchTrace strapsim(const WeightedSet& x, const WeightedSet& y, const SimilarityMatrix& s,
                    const StrapsimOptions& options = {});
MatchTrace strapsim(std::span<const double> wx, std::span<const double> wy, MatrixView s,
                    const StrapsimOptions& options = {});

// Same score and residual as strapsim() without materializing the trace.
MetricResult strapsim_score(std::span<const double> wx, std::span<const double> wy,
                            MatrixView s, const StrapsimOptions& options = {});

// STRAPSim under exact-match-only similarity: sum over shared ids of the
// smaller weight.
MetricResult strapsim_identity_reduction(const WeightedSet& x, const WeightedSet& y);

MetricResult jaccard(const WeightedSet& x, const WeightedSet& y);

// Errors: DegenerateUnion when both sets carry no weight.
MetricResult weighted_jaccard(const WeightedSet& x, const WeightedSet& y);

/// Greedy argmax matching without weight updates. Each row (recall) and each
/// column (precision) is paired with its best counterpart, lowest index on
/// ties, and weighted by the smaller of the two masses. The residual side
/// deducts those min-weights from one shared pair of remaining-mass arrays
/// and reports 1 - sum(max(0, remaining)) per direction.
MetricResult bertscore_like(const WeightedSet& x, const WeightedSet& y, const SimilarityMatrix& s);
MetricResult bertscore_like(std::span<const double> wx, std::span<const double> wy, MatrixView s);

struct TransportAssignment {
  std::size_t row = 0;
  std::size_t col = 0;
  double mass = 0.0;
};

struct TransportPlan {
  std::vector<TransportAssignment> assignments;
  double objective = 0.0;
};

inline constexpr std::size_t kOracleMaxCells = 64;

// Exact maximizer of sum(mass * S) under row/column capacities, for test-scale
// instances. Errors: TooLarge beyond kOracleMaxCells cells, DimensionMismatch.
TransportPlan exact_transport_oracle(const WeightedSet& x, const WeightedSet& y,
                                     const SimilarityMatrix& s);
TransportPlan exact_transport_oracle(std::span<const double> wx, std::span<const double> wy,
                                     MatrixView s);

// Aligns `s` (when the metric needs it) and evaluates one pair.
MetricResult evaluate(Metric metric, const WeightedSet& x, const WeightedSet& y,
                      const SimilarityMatrix* s, const StrapsimOptions& options = {});

/// Scores pairs drawn from a fixed collection of sets against one shared
/// constituent matrix, resolving ids once up front.
class PairScorer {
 public:
  // `s` may be null for Jaccard and weighted Jaccard. Both the sets and the
  // matrix must outlive the scorer.
  PairScorer(std::span<const WeightedSet> sets, const SimilarityMatrix* s, Metric metric,
             StrapsimOptions options = {});

  std::size_t size() const noexcept { return sets_.size(); }
  Metric metric() const noexcept { return metric_; }
  MetricResult score(std::size_t a, std::size_t b) const;

 private:
  std::span<const WeightedSet> sets_;
  const SimilarityMatrix* matrix_;
  Metric metric_;
  StrapsimOptions options_;
  std::vector<std::vector<std::uint32_t>> row_index_;
  std::vector<std::vector<std::uint32_t>> col_index_;
};

struct PairwiseMatrix {
  std::vector<std::string> labels;
  std::vector<MetricResult> cells;

  std::size_t size() const noexcept { return labels.size(); }
  const MetricResult& at(std::size_t i, std::size_t j) const { return cells[i * labels.size() + j]; }
};

// Symmetric matrix of pair results: the upper triangle is computed and mirrored.
PairwiseMatrix pairwise_matrix(std::span<const WeightedSet> sets, const SimilarityMatrix* s,
                               Metric metric, const StrapsimOptions& options = {},
                               std::size_t threads = 0);

}  // namespace strapsim::metrics
