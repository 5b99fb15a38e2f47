#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "strapsim/core.hpp"

namespace strapsim::eval {

struct Neighbor {
  std::size_t index = 0;  // position in the pool
  double score = 0.0;
};

struct NeighborList {
  std::string query;
  std::vector<Neighbor> neighbors;  // non-increasing score
  std::size_t k = 0;
};

/// The min(k, pool) highest scores; equal scores keep pool order.
/// Errors: EmptyPool, InvalidArgument when k = 0.
std::vector<Neighbor> top_k(std::span<const double> pool_scores, std::size_t k);

/// Majority label; ties go to the larger similarity sum, then the
/// lexicographically smallest label. Errors: EmptyPool.
std::string vote(std::span<const Neighbor> neighbors, std::span<const std::string> pool_labels);

/// Similarity-weighted mean of the neighbour targets, or the plain mean when
/// every similarity is zero. Errors: EmptyPool.
double weighted_mean(std::span<const Neighbor> neighbors, std::span<const double> pool_targets);

using SetSimilarity = std::function<double(const WeightedSet&, const WeightedSet&)>;

struct LabeledSet {
  WeightedSet set;
  std::string label;
};

struct TargetSet {
  WeightedSet set;
  double target = 0.0;
};

std::string knn_classify(const WeightedSet& query, std::span<const LabeledSet> pool,
                         const SetSimilarity& sim, std::size_t k);
double knn_regress(const WeightedSet& query, std::span<const TargetSet> pool,
                   const SetSimilarity& sim, std::size_t k);

/// Fold index per item: a seeded shuffle dealt round-robin, so fold sizes
/// differ by at most one. Errors: TooFewRows when n < folds, InvalidArgument
/// when folds < 2.
std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t folds, std::uint64_t seed);

enum class Task { Classification, Regression, Ranking };
std::string_view task_name(Task task) noexcept;

struct FoldScores {
  std::size_t fold = 0;
  std::map<std::string, double> metrics;
};

struct EvalReport {
  Task task = Task::Classification;
  std::string dataset;
  std::string metric;
  std::size_t k = 0;
  std::map<std::string, double> metrics;  // pooled over all folds
  std::vector<FoldScores> folds;
};

struct CvConfig {
  std::size_t k = 5;
  std::size_t folds = 10;
  std::uint64_t seed = 42;
};

/// Leave-fold-out KNN over a precomputed n x n row-major similarity matrix.
/// Each test item's pool is every item outside its fold.
EvalReport cross_validate_classification(std::span<const double> similarity,
                                         std::span<const std::string> labels, const CvConfig& config);
EvalReport cross_validate_regression(std::span<const double> similarity,
                                     std::span<const double> targets, const CvConfig& config);

nlohmann::json to_json(const EvalReport& report);
// Header: dataset,metric,k,fold,<sorted metric names>; fold "all" is pooled.
void write_report_csv(std::ostream& out, std::span<const EvalReport> reports);

}  // namespace strapsim::eval
