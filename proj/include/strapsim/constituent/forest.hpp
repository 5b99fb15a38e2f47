#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "strapsim/constituent/features.hpp"
#include "strapsim/core.hpp"

namespace strapsim::constituent {

struct ForestConfig {
  std::size_t trees = 100;
  std::size_t max_depth = 8;
  std::size_t min_leaf = 2;
  std::uint64_t seed = 42;
  std::size_t max_features = 0;  // 0: ceil(sqrt(p))
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // rows with value <= threshold go left
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double value = 0.0;  // mean target of the training rows reaching the node
};

/// Axis-aligned regression tree, nodes stored in preorder so that node
/// indices survive serialization.
struct RegressionTree {
  std::vector<TreeNode> nodes;

  std::uint32_t leaf_of(std::span<const double> row) const;
  double predict(std::span<const double> row) const { return nodes[leaf_of(row)].value; }
  std::size_t depth() const;
};

struct ForestModel {
  std::vector<std::string> feature_names;
  std::string target;
  ForestConfig config;
  std::vector<RegressionTree> trees;

  double predict(std::span<const double> row) const;
  // Leaf index per tree, written into `out` (size trees.size()).
  void leaves(std::span<const double> row, std::uint32_t* out) const;
};

/// Bagged CART: bootstrap sample per tree, ceil(sqrt(p)) candidate features
/// per split, variance-reduction splits with at least min_leaf rows per side.
/// Tree t draws from derive_seed(config.seed, t), so results do not depend on
/// the thread count. Errors: TargetMissing, InsufficientRows (< 10 rows).
ForestModel forest_fit(const FeatureTable& table, const std::string& target,
                       const ForestConfig& config, std::size_t threads = 0);

struct TuningOptions {
  std::vector<std::size_t> tree_grid{50, 100};
  std::vector<std::size_t> depth_grid{4, 8, 12};
  std::size_t cv_folds = 5;
  double test_fraction = 0.1;
};

struct GridPoint {
  std::size_t trees = 0;
  std::size_t max_depth = 0;
  double cv_rmse = 0.0;
};

struct ForestReport {
  ForestModel model;
  std::vector<GridPoint> grid;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  double train_rmse = 0.0;
  double test_rmse = 0.0;
  // Over rows with non-zero truth; fraction, not percent.
  double train_mape = 0.0;
  double test_mape = 0.0;
};

/// Holds out test_fraction of the rows, picks (trees, depth) by k-fold CV RMSE
/// on the rest (ties to the earlier grid point), refits on the whole training
/// part and reports train/test errors. Errors: as forest_fit, TooFewRows.
ForestReport forest_train(const FeatureTable& table, const std::string& target,
                          const ForestConfig& base, const TuningOptions& tuning,
                          std::size_t threads = 0);

/// Fraction of trees, pooled over all models, in which two rows share a leaf.
/// Errors: SchemaMismatch when `rows` lacks a model feature or models disagree.
SimilarityMatrix forest_proximity(std::span<const ForestModel> models, const FeatureTable& rows,
                                  std::size_t threads = 0);
SimilarityMatrix forest_proximity(const ForestModel& model, const FeatureTable& rows,
                                  std::size_t threads = 0);

inline constexpr int kForestFormatVersion = 1;

nlohmann::json to_json(std::span<const ForestModel> models);
// Errors: ParseError on a malformed or unsupported document.
std::vector<ForestModel> forests_from_json(const nlohmann::json& doc);

}  // namespace strapsim::constituent
