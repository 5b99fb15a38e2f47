#include "strapsim/constituent/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "strapsim/error.hpp"
#include "strapsim/simd/kernels.hpp"
#include "strapsim/util/parallel.hpp"
#include "strapsim/util/random.hpp"

namespace strapsim::constituent {

std::uint32_t RegressionTree::leaf_of(std::span<const double> row) const {
  std::uint32_t at = 0;
  while (nodes[at].feature >= 0) {
    const TreeNode& node = nodes[at];
    at = row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return at;
}

std::size_t RegressionTree::depth() const {
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (nodes[i].feature >= 0) level[nodes[i].left] = level[nodes[i].right] = level[i] + 1;
  }
  return deepest;
}

double ForestModel::predict(std::span<const double> row) const {
  double total = 0.0;
  for (const auto& tree : trees) total += tree.predict(row);
  return total / static_cast<double>(trees.size());
}

void ForestModel::leaves(std::span<const double> row, std::uint32_t* out) const {
  for (std::size_t t = 0; t < trees.size(); ++t) out[t] = trees[t].leaf_of(row);
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const FeatureTable& table, const std::vector<double>& y, const ForestConfig& config,
              std::size_t mtry, util::Rng& rng)
      : table_(table), y_(y), config_(config), mtry_(mtry), rng_(rng) {
    features_.resize(table.cols());
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  RegressionTree build(std::vector<std::size_t> sample) {
    RegressionTree tree;
    grow(tree, sample, 0);
    return tree;
  }

 private:
  struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
    bool found = false;
  };

  std::uint32_t grow(RegressionTree& tree, std::vector<std::size_t>& rows, std::size_t depth) {
    const auto index = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    double sum = 0.0;
    for (std::size_t r : rows) sum += y_[r];
    tree.nodes[index].value = sum / static_cast<double>(rows.size());

    if (depth >= config_.max_depth || rows.size() < 2 * config_.min_leaf) return index;
    const Split split = best_split(rows);
    if (!split.found) return index;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : rows) {
      (table_.at(r, split.feature) <= split.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    tree.nodes[index].feature = static_cast<std::int32_t>(split.feature);
    tree.nodes[index].threshold = split.threshold;
    const std::uint32_t l = grow(tree, left, depth + 1);
    const std::uint32_t r = grow(tree, right, depth + 1);
    tree.nodes[index].left = l;
    tree.nodes[index].right = r;
    return index;
  }

  Split best_split(const std::vector<std::size_t>& rows) {
    // Partial Fisher-Yates picks mtry distinct candidate features.
    for (std::size_t k = 0; k < mtry_; ++k) {
      const std::size_t j = k + util::uniform_index(rng_, features_.size() - k);
      std::swap(features_[k], features_[j]);
    }
    const std::size_t n = rows.size();
    double total = 0.0;
    for (std::size_t r : rows) total += y_[r];

    Split best;
    order_.assign(rows.begin(), rows.end());
    for (std::size_t k = 0; k < mtry_; ++k) {
      const std::size_t f = features_[k];
      std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
        const double va = table_.at(a, f);
        const double vb = table_.at(b, f);
        return va < vb || (va == vb && a < b);
      });
      // Maximizing sum_l^2/n_l + sum_r^2/n_r is maximizing variance reduction.
      const double base = total * total / static_cast<double>(n);
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += y_[order_[i]];
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (nl < config_.min_leaf || nr < config_.min_leaf) continue;
        const double lo = table_.at(order_[i], f);
        const double hi = table_.at(order_[i + 1], f);
        if (!(lo < hi)) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(nl) +
                            right_sum * right_sum / static_cast<double>(nr) - base;
        if (gain > best.gain + 1e-12 * (std::abs(base) + 1.0)) {
          best.found = true;
          best.gain = gain;
          best.feature = f;
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid < hi)) mid = lo;
          best.threshold = mid;
        }
      }
    }
    return best;
  }

  const FeatureTable& table_;
  const std::vector<double>& y_;
  const ForestConfig& config_;
  std::size_t mtry_;
  util::Rng& rng_;
  std::vector<std::size_t> features_;
  std::vector<std::size_t> order_;
};

double rmse_of(const std::vector<double>& pred, const std::vector<double>& truth) {
  double sq = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sq += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return pred.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(pred.size()));
}

double mape_of(const std::vector<double>& pred, const std::vector<double>& truth) {
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (truth[i] == 0.0) continue;
    total += std::abs((pred[i] - truth[i]) / truth[i]);
    ++used;
  }
  return used == 0 ? 0.0 : total / static_cast<double>(used);
}

std::vector<double> predict_all(const ForestModel& model, const FeatureTable& table) {
  std::vector<double> out(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) out[r] = model.predict(table.row(r));
  return out;
}

}  // namespace

ForestModel forest_fit(const FeatureTable& table, const std::string& target,
                       const ForestConfig& config, std::size_t threads) {
  table.validate();
  const auto t = table.find_target(target);
  if (!t) throw Error(ErrorCode::TargetMissing, "target '" + target + "' not in table");
  if (table.rows() < 10) {
    throw Error(ErrorCode::InsufficientRows,
                "forest training needs at least 10 rows, got " + std::to_string(table.rows()));
  }
  if (table.cols() == 0) throw Error(ErrorCode::InsufficientRows, "forest training needs features");
  if (config.trees == 0) throw Error(ErrorCode::InvalidArgument, "forest needs at least one tree");
  if (config.min_leaf == 0) throw Error(ErrorCode::InvalidArgument, "min_leaf must be positive");

  const std::vector<double> y = table.target_column(*t);
  const std::size_t p = table.cols();
  std::size_t mtry = config.max_features;
  if (mtry == 0) mtry = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p))));
  mtry = std::min(mtry, p);

  ForestModel model;
  model.feature_names = table.feature_names;
  model.target = target;
  model.config = config;
  model.trees.resize(config.trees);
  const std::size_t n = table.rows();
  util::parallel_for(config.trees, threads, [&](std::size_t k) {
    util::Rng rng(util::derive_seed(config.seed, k));
    std::vector<std::size_t> sample(n);
    for (auto& r : sample) r = util::uniform_index(rng, n);
    TreeBuilder builder(table, y, config, mtry, rng);
    model.trees[k] = builder.build(std::move(sample));
  });
  return model;
}

ForestReport forest_train(const FeatureTable& table, const std::string& target,
                          const ForestConfig& base, const TuningOptions& tuning,
                          std::size_t threads) {
  table.validate();
  const auto t = table.find_target(target);
  if (!t) throw Error(ErrorCode::TargetMissing, "target '" + target + "' not in table");
  if (table.rows() < 10) {
    throw Error(ErrorCode::InsufficientRows,
                "forest training needs at least 10 rows, got " + std::to_string(table.rows()));
  }
  if (tuning.tree_grid.empty() || tuning.depth_grid.empty() || tuning.cv_folds < 2) {
    throw Error(ErrorCode::InvalidArgument, "tuning grid must be non-empty with at least 2 folds");
  }

  util::Rng rng(util::derive_seed(base.seed, 0x5eed));
  std::vector<std::size_t> order(table.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  util::shuffle(order, rng);
  auto n_test = static_cast<std::size_t>(std::llround(tuning.test_fraction * static_cast<double>(order.size())));
  n_test = std::min(n_test, order.size() - 1);
  std::vector<std::size_t> test_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train_rows(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  if (train_rows.size() < tuning.cv_folds) {
    throw Error(ErrorCode::TooFewRows, "fewer training rows than tuning folds");
  }
  const FeatureTable train = table.select_rows(train_rows);
  const FeatureTable test = table.select_rows(test_rows);

  ForestReport report;
  report.train_ids = train.row_ids;
  report.test_ids = test.row_ids;

  // Fold k holds the training rows at positions congruent to k.
  const std::size_t folds = tuning.cv_folds;
  GridPoint best{0, 0, INFINITY};
  for (std::size_t trees : tuning.tree_grid) {
    for (std::size_t depth : tuning.depth_grid) {
      ForestConfig cfg = base;
      cfg.trees = trees;
      cfg.max_depth = depth;
      double sq = 0.0;
      for (std::size_t k = 0; k < folds; ++k) {
        std::vector<std::size_t> fit_rows;
        std::vector<std::size_t> hold_rows;
        for (std::size_t r = 0; r < train.rows(); ++r) (r % folds == k ? hold_rows : fit_rows).push_back(r);
        cfg.seed = util::derive_seed(base.seed, 100 + k);
        const FeatureTable fit = train.select_rows(fit_rows);
        const FeatureTable hold = train.select_rows(hold_rows);
        if (fit.rows() < 10) {
          throw Error(ErrorCode::InsufficientRows, "tuning fold has fewer than 10 training rows");
        }
        const ForestModel m = forest_fit(fit, target, cfg, threads);
        const auto pred = predict_all(m, hold);
        const auto truth = hold.target_column(*t);
        for (std::size_t i = 0; i < pred.size(); ++i) sq += (pred[i] - truth[i]) * (pred[i] - truth[i]);
      }
      GridPoint point{trees, depth, std::sqrt(sq / static_cast<double>(train.rows()))};
      report.grid.push_back(point);
      if (point.cv_rmse < best.cv_rmse) best = point;
    }
  }

  ForestConfig final_cfg = base;
  final_cfg.trees = best.trees;
  final_cfg.max_depth = best.max_depth;
  report.model = forest_fit(train, target, final_cfg, threads);
  report.train_rmse = rmse_of(predict_all(report.model, train), train.target_column(*t));
  report.train_mape = mape_of(predict_all(report.model, train), train.target_column(*t));
  if (test.rows() > 0) {
    report.test_rmse = rmse_of(predict_all(report.model, test), test.target_column(*t));
    report.test_mape = mape_of(predict_all(report.model, test), test.target_column(*t));
  }
  return report;
}

SimilarityMatrix forest_proximity(std::span<const ForestModel> models, const FeatureTable& rows,
                                  std::size_t threads) {
  if (models.empty()) throw Error(ErrorCode::InvalidArgument, "no forest models");
  rows.validate();
  const auto& names = models.front().feature_names;
  std::vector<std::size_t> source(names.size());
  for (std::size_t f = 0; f < names.size(); ++f) {
    auto c = rows.find_feature(names[f]);
    if (!c) throw Error(ErrorCode::SchemaMismatch, "rows lack model feature '" + names[f] + "'");
    source[f] = *c;
  }
  std::size_t total_trees = 0;
  for (const auto& m : models) {
    if (m.feature_names != names) throw Error(ErrorCode::SchemaMismatch, "forest models use different features");
    total_trees += m.trees.size();
  }
  if (total_trees == 0) throw Error(ErrorCode::InvalidArgument, "forest has no trees");

  const std::size_t n = rows.rows();
  std::vector<std::uint32_t> leaves(n * total_trees);
  util::parallel_for(n, threads, [&](std::size_t r) {
    std::vector<double> x(names.size());
    for (std::size_t f = 0; f < names.size(); ++f) x[f] = rows.at(r, source[f]);
    std::uint32_t* out = leaves.data() + r * total_trees;
    for (const auto& m : models) {
      m.leaves(x, out);
      out += m.trees.size();
    }
  });

  const auto& k = simd::kernels();
  const double scale = static_cast<double>(total_trees);
  std::vector<double> values(n * n, 0.0);
  util::parallel_for(n, threads, [&](std::size_t i) {
    values[i * n + i] = 1.0;
    const std::uint32_t* li = leaves.data() + i * total_trees;
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::size_t same = k.count_equal(li, leaves.data() + j * total_trees, total_trees);
      values[i * n + j] = static_cast<double>(same) / scale;
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) values[i * n + j] = values[j * n + i];
  return SimilarityMatrix::square(rows.row_ids, std::move(values));
}

SimilarityMatrix forest_proximity(const ForestModel& model, const FeatureTable& rows,
                                  std::size_t threads) {
  return forest_proximity(std::span<const ForestModel>(&model, 1), rows, threads);
}

namespace {

nlohmann::json node_to_json(const RegressionTree& tree, std::uint32_t at) {
  const TreeNode& node = tree.nodes[at];
  if (node.feature < 0) return {{"leaf", node.value}};
  return {{"feature", node.feature},
          {"threshold", node.threshold},
          {"value", node.value},
          {"left", node_to_json(tree, node.left)},
          {"right", node_to_json(tree, node.right)}};
}

std::uint32_t node_from_json(const nlohmann::json& j, RegressionTree& tree, std::size_t features,
                             std::size_t depth) {
  if (depth > 4096) throw Error(ErrorCode::ParseError, "forest model nests too deeply");
  const auto index = static_cast<std::uint32_t>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("leaf")) {
    tree.nodes[index].value = j.at("leaf").get<double>();
    return index;
  }
  const auto feature = j.at("feature").get<std::int32_t>();
  if (feature < 0 || static_cast<std::size_t>(feature) >= features) {
    throw Error(ErrorCode::ParseError, "forest node references feature " + std::to_string(feature));
  }
  tree.nodes[index].feature = feature;
  tree.nodes[index].threshold = j.at("threshold").get<double>();
  tree.nodes[index].value = j.at("value").get<double>();
  const std::uint32_t l = node_from_json(j.at("left"), tree, features, depth + 1);
  const std::uint32_t r = node_from_json(j.at("right"), tree, features, depth + 1);
  tree.nodes[index].left = l;
  tree.nodes[index].right = r;
  return index;
}

}  // namespace

nlohmann::json to_json(std::span<const ForestModel> models) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& m : models) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : m.trees) trees.push_back(node_to_json(tree, 0));
    list.push_back({{"target", m.target},
                    {"feature_names", m.feature_names},
                    {"config",
                     {{"trees", m.config.trees},
                      {"max_depth", m.config.max_depth},
                      {"min_leaf", m.config.min_leaf},
                      {"seed", m.config.seed},
                      {"max_features", m.config.max_features}}},
                    {"trees", std::move(trees)}});
  }
  return {{"format", "strapsim-forest"}, {"version", kForestFormatVersion}, {"models", std::move(list)}};
}

std::vector<ForestModel> forests_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "strapsim-forest") {
      throw Error(ErrorCode::ParseError, "not a forest model document");
    }
    if (doc.at("version").get<int>() != kForestFormatVersion) {
      throw Error(ErrorCode::ParseError,
                  "unsupported forest model version " + std::to_string(doc.at("version").get<int>()));
    }
    std::vector<ForestModel> out;
    for (const auto& jm : doc.at("models")) {
      ForestModel m;
      m.target = jm.at("target").get<std::string>();
      m.feature_names = jm.at("feature_names").get<std::vector<std::string>>();
      const auto& c = jm.at("config");
      m.config.trees = c.at("trees").get<std::size_t>();
      m.config.max_depth = c.at("max_depth").get<std::size_t>();
      m.config.min_leaf = c.at("min_leaf").get<std::size_t>();
      m.config.seed = c.at("seed").get<std::uint64_t>();
      m.config.max_features = c.at("max_features").get<std::size_t>();
      for (const auto& jt : jm.at("trees")) {
        RegressionTree tree;
        node_from_json(jt, tree, m.feature_names.size(), 0);
        m.trees.push_back(std::move(tree));
      }
      if (m.trees.empty()) throw Error(ErrorCode::ParseError, "forest model has no trees");
      out.push_back(std::move(m));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("forest model: ") + e.what());
  }
}

}  // namespace strapsim::constituent
