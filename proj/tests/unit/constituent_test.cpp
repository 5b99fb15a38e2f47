#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "strapsim/constituent/features.hpp"
#include "strapsim/constituent/forest.hpp"
#include "strapsim/constituent/tfidf.hpp"
#include "strapsim/error.hpp"
#include "strapsim/ingest/datasets.hpp"

using namespace strapsim;
using namespace strapsim::constituent;

namespace {

FeatureTable make_table(std::vector<std::string> features, std::vector<double> values,
                        std::vector<std::string> targets = {}, std::vector<double> target_values = {}) {
  FeatureTable t;
  t.feature_names = std::move(features);
  t.values = std::move(values);
  const std::size_t rows = t.values.size() / t.feature_names.size();
  for (std::size_t r = 0; r < rows; ++r) t.row_ids.push_back("r" + std::to_string(r));
  t.target_names = std::move(targets);
  t.targets = std::move(target_values);
  return t;
}

FeatureTable iris() { return ingest::load_iris(STRAPSIM_DATA_DIR "/iris.csv"); }

// One feature x in [0, 1), target f(x), plus `noise_features` irrelevant columns.
FeatureTable single_driver(std::size_t rows, std::size_t noise_features, std::uint64_t seed,
                           double (*f)(double)) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::string> names{"x"};
  for (std::size_t k = 0; k < noise_features; ++k) names.push_back("noise" + std::to_string(k));
  std::vector<double> values, targets;
  for (std::size_t r = 0; r < rows; ++r) {
    const double x = u(rng);
    values.push_back(x);
    for (std::size_t k = 0; k < noise_features; ++k) values.push_back(u(rng));
    targets.push_back(f(x));
  }
  return make_table(names, values, {"y"}, targets);
}

}  // namespace

// ---- max_scale ----

TEST(MaxScale, IrisFirstRowMatchesPublishedExample) {
  const auto scaled = max_scale(iris());
  const double expected[] = {0.65, 0.80, 0.20, 0.08};
  for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(scaled.at(0, c), expected[c], 0.005) << c;
  EXPECT_NEAR(scaled.at(0, 0), 5.1 / 7.9, 1e-12);
  EXPECT_NEAR(scaled.at(0, 3), 0.2 / 2.5, 1e-12);
}

TEST(MaxScale, ConstantOnesStayOnes) {
  const auto scaled = max_scale(make_table({"a"}, {1, 1, 1}));
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(scaled.at(r, 0), 1.0);
}

TEST(MaxScale, RejectsNonPositiveMaximum) {
  try {
    max_scale(make_table({"a", "b"}, {1, 0, 2, 0}));
    FAIL() << "expected NonPositiveColumnMax";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveColumnMax);
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos);
  }
}

TEST(MaxScale, IdempotentOnNonNegativeData) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t cols = 1 + trial % 5;
    const std::size_t rows = 1 + (trial / 5) % 7;
    std::vector<std::string> names;
    for (std::size_t c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
    std::vector<double> v(rows * cols);
    for (auto& x : v) x = u(rng);
    const auto once = max_scale(make_table(names, v));
    const auto twice = max_scale(once);
    for (std::size_t i = 0; i < v.size(); ++i) ASSERT_NEAR(once.values[i], twice.values[i], 1e-15);
  }
}

// ---- feature correlation ----

TEST(FeatureCorrelation, ReproducesIrisTable) {
  const auto s = feature_correlation_matrix(max_scale(iris()));
  ASSERT_EQ(s.rows(), 4u);
  // Upper triangle as published, in feature order.
  const double published[4][4] = {{1, 0.978, 0.948, 0.898},
                                  {0, 1, 0.871, 0.809},
                                  {0, 0, 1, 0.983},
                                  {0, 0, 0, 1}};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i; j < 4; ++j) {
      EXPECT_NEAR(s.at(i, j), published[i][j], 0.01) << i << "," << j;
      EXPECT_EQ(s.at(i, j), s.at(j, i));
    }
  }
}

TEST(FeatureCorrelation, OrthogonalIndicatorsScoreZero) {
  const auto s = feature_correlation_matrix(make_table({"a", "b"}, {1, 0, 0, 1}));
  EXPECT_EQ(s.at(0, 1), 0.0);
  EXPECT_EQ(s.at(0, 0), 1.0);
}

TEST(FeatureCorrelation, NeedsTwoRows) {
  EXPECT_THROW(
      {
        try {
          feature_correlation_matrix(make_table({"a", "b"}, {1, 1}));
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::TooFewRows);
          throw;
        }
      },
      Error);
}

TEST(FeatureRows, RowAsWeightedSetUsesScaledValues) {
  const auto scaled = max_scale(iris());
  const auto raw = row_as_weighted_set(scaled, 0, false);
  ASSERT_EQ(raw.size(), 4u);
  EXPECT_EQ(raw.id(0).str(), "sepal_length");
  EXPECT_DOUBLE_EQ(raw.weight(1), 3.5 / 4.4);
  const auto normalized = row_as_weighted_set(scaled, 0, true);
  EXPECT_NEAR(normalized.total_weight(), 1.0, 1e-12);
}

// ---- encoding ----

TEST(Encode, OneHotKeepsEveryLevelSorted) {
  RawTable raw{{"id", "colour", "size", "price"},
               {{"a", "red", "1", "10"}, {"b", "blue", "2", "20"}, {"c", "red", "3", "30"}}};
  EncodeOptions options;
  options.id_column = "id";
  options.target_columns = {"price"};
  const auto t = encode(raw, options);
  const std::vector<std::string> expected{"colour=blue", "colour=red", "size"};
  EXPECT_EQ(t.feature_names, expected);
  EXPECT_EQ(t.row_ids, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(t.at(0, 1), 1.0);
  EXPECT_EQ(t.at(0, 0), 0.0);
  EXPECT_EQ(t.at(1, 0), 1.0);
  EXPECT_EQ(t.at(2, 2), 3.0);
  EXPECT_EQ(t.target_column(0), (std::vector<double>{10, 20, 30}));
}

TEST(Encode, Errors) {
  RawTable raw{{"a", "b"}, {{"1", "2"}}};
  EncodeOptions missing;
  missing.target_columns = {"y"};
  try {
    encode(raw, missing);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TargetMissing);
  }
  RawTable ragged{{"a", "b"}, {{"1", "2"}, {"3"}}};
  try {
    encode(ragged, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaMismatch);
  }
}

// ---- TF-IDF ----

TEST(Tfidf, TokenizesLowercaseAlphanumericRuns) {
  EXPECT_EQ(tokenize("Sci-Fi, THRILLER!  2001"), (std::vector<std::string>{"sci", "fi", "thriller", "2001"}));
  EXPECT_TRUE(tokenize(" ,.;").empty());
}

TEST(Tfidf, SingleDocumentSelfCosineIsOne) {
  const auto index = tfidf_build({{"d", "a a b"}});
  const auto a = index.find_term("a");
  ASSERT_TRUE(a);
  EXPECT_EQ(index.vector(0).front().weight, 2.0 * index.idf()[*a]);
  EXPECT_NEAR(tfidf_cosine(index, 0, 0), 1.0, 1e-12);
}

TEST(Tfidf, IdenticalAndDisjointDocuments) {
  const auto index = tfidf_build({{"x", "bond fund"}, {"y", "bond fund"}, {"z", "equity growth"}});
  const auto m = tfidf_cosine_matrix(index, {"x", "y", "z"});
  EXPECT_NEAR(m.at(0, 1), 1.0, 1e-12);
  EXPECT_EQ(m.at(0, 2), 0.0);
  EXPECT_EQ(m.at(2, 2), 1.0);
}

TEST(Tfidf, HandComputedCosine) {
  // Vocabulary {credit, bond, fund, equity}, N = 3.
  const auto index = tfidf_build({{"d1", "credit bond fund"}, {"d2", "bond fund"}, {"d3", "equity"}});
  ASSERT_EQ(index.vocabulary().size(), 4u);
  const double idf_credit = std::log(4.0 / 2.0) + 1.0;  // df 1
  const double idf_shared = std::log(4.0 / 3.0) + 1.0;  // df 2
  const double dot = 2.0 * idf_shared * idf_shared;
  const double n1 = std::sqrt(idf_credit * idf_credit + 2.0 * idf_shared * idf_shared);
  const double n2 = std::sqrt(2.0 * idf_shared * idf_shared);
  const double expected = dot / (n1 * n2);
  EXPECT_GT(expected, 0.0);
  EXPECT_LT(expected, 1.0);
  EXPECT_NEAR(tfidf_cosine(index, 0, 1), expected, 1e-12);
}

TEST(Tfidf, Errors) {
  EXPECT_THROW(tfidf_build({}), Error);
  EXPECT_THROW(tfidf_build({{"a", "x"}, {"a", "y"}}), Error);
  const auto index = tfidf_build({{"a", "x"}, {"b", "..."}});
  try {
    tfidf_cosine_matrix(index, {"a", "missing"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownDocument);
  }
  try {
    tfidf_cosine_matrix(index, {"a", "b"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVector);
  }
}

TEST(Tfidf, SelfCosineAndRangeOnRandomCorpora) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> words{"bond", "fund", "credit", "equity", "yield", "growth", "value"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<std::string, std::string>> docs;
    std::vector<std::string> ids;
    const std::size_t n = 2 + rng() % 6;
    for (std::size_t d = 0; d < n; ++d) {
      std::string text;
      const std::size_t len = 1 + rng() % 5;
      for (std::size_t w = 0; w < len; ++w) text += words[rng() % words.size()] + " ";
      ids.push_back("d" + std::to_string(d));
      docs.emplace_back(ids.back(), text);
    }
    const auto index = tfidf_build(docs);
    for (std::size_t d = 0; d < n; ++d) ASSERT_NEAR(tfidf_cosine(index, d, d), 1.0, 1e-9);
    const auto m = tfidf_cosine_matrix(index, ids);
    for (double v : m.values()) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
  }
}

// ---- forests ----

TEST(Forest, LearnsIdentityTarget) {
  auto table = single_driver(400, 0, 3, [](double x) { return x; });
  std::vector<std::size_t> train, test;
  for (std::size_t r = 0; r < table.rows(); ++r) (r % 10 == 0 ? test : train).push_back(r);
  ForestConfig config;
  config.trees = 50;
  config.max_depth = 8;
  const auto model = forest_fit(table.select_rows(train), "y", config);
  const auto held = table.select_rows(test);
  double sq = 0.0, mean = 0.0, var = 0.0;
  for (std::size_t r = 0; r < held.rows(); ++r) mean += held.targets[r];
  mean /= static_cast<double>(held.rows());
  for (std::size_t r = 0; r < held.rows(); ++r) {
    const double e = model.predict(held.row(r)) - held.targets[r];
    sq += e * e;
    var += (held.targets[r] - mean) * (held.targets[r] - mean);
  }
  const double rmse = std::sqrt(sq / static_cast<double>(held.rows()));
  const double sd = std::sqrt(var / static_cast<double>(held.rows()));
  EXPECT_LT(rmse, 0.05 * sd);
}

TEST(Forest, ConstantTargetPredictsConstant) {
  auto table = single_driver(30, 2, 5, [](double) { return 4.25; });
  const auto model = forest_fit(table, "y", ForestConfig{});
  for (std::size_t r = 0; r < table.rows(); ++r) EXPECT_EQ(model.predict(table.row(r)), 4.25);
}

TEST(Forest, Errors) {
  auto tiny = single_driver(2, 0, 1, [](double x) { return x; });
  try {
    forest_fit(tiny, "y", ForestConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientRows);
  }
  auto table = single_driver(20, 0, 1, [](double x) { return x; });
  try {
    forest_fit(table, "nope", ForestConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TargetMissing);
  }
  const auto model = forest_fit(table, "y", ForestConfig{});
  const auto other = make_table({"z"}, {1.0, 2.0});
  try {
    forest_proximity(model, other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaMismatch);
  }
}

TEST(Forest, DeterministicAcrossRunsAndThreadCounts) {
  auto table = single_driver(120, 3, 9, [](double x) { return x * x; });
  ForestConfig config;
  config.trees = 20;
  const auto a = forest_fit(table, "y", config, 1);
  const auto b = forest_fit(table, "y", config, 4);
  EXPECT_EQ(to_json(std::span(&a, 1)).dump(), to_json(std::span(&b, 1)).dump());
  config.seed = 43;
  const auto c = forest_fit(table, "y", config, 1);
  EXPECT_NE(to_json(std::span(&a, 1)).dump(), to_json(std::span(&c, 1)).dump());
}

TEST(Forest, JsonRoundTrip) {
  auto table = single_driver(80, 2, 4, [](double x) { return std::sin(6 * x); });
  ForestConfig config;
  config.trees = 7;
  std::vector<ForestModel> models{forest_fit(table, "y", config)};
  const auto doc = to_json(models);
  const auto back = forests_from_json(nlohmann::json::parse(doc.dump()));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(to_json(back).dump(), doc.dump());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    EXPECT_EQ(back[0].predict(table.row(r)), models[0].predict(table.row(r)));
  }
  EXPECT_THROW(forests_from_json(nlohmann::json{{"format", "other"}}), Error);
}

TEST(ForestProximity, HandBuiltTwoTreeForest) {
  ForestModel model;
  model.feature_names = {"x"};
  model.target = "y";
  RegressionTree split;
  split.nodes = {{0, 0.5, 1, 2, 0.0}, {-1, 0, 0, 0, 0.0}, {-1, 0, 0, 0, 1.0}};
  RegressionTree stump;
  stump.nodes = {{-1, 0, 0, 0, 0.5}};
  model.trees = {split, stump};
  const auto rows = make_table({"x"}, {0.2, 0.8, 0.3});
  const auto p = forest_proximity(model, rows);
  EXPECT_EQ(p.at(0, 1), 0.5);
  EXPECT_EQ(p.at(0, 2), 1.0);
  EXPECT_EQ(p.at(1, 1), 1.0);
}

TEST(ForestProximity, SeparatedClustersNeverShareLeaves) {
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(0.01 * i);
    y.push_back(0.0);
    x.push_back(0.8 + 0.01 * i);
    y.push_back(1.0);
  }
  const auto table = make_table({"x"}, x, {"y"}, y);
  ForestConfig config;
  config.trees = 30;
  const auto p = forest_proximity(forest_fit(table, "y", config), table);
  for (std::size_t i = 0; i < table.rows(); i += 2) {
    for (std::size_t j = 1; j < table.rows(); j += 2) ASSERT_EQ(p.at(i, j), 0.0);
  }
}

TEST(ForestProximity, SymmetricUnitDiagonalQuantized) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t trees = 1 + rng() % 6;
    const std::size_t rows = 10 + rng() % 8;
    auto table = single_driver(rows, rng() % 3, rng(), [](double v) { return v * v; });
    ForestConfig config;
    config.trees = trees;
    config.max_depth = 1 + rng() % 4;
    config.seed = rng();
    const auto p = forest_proximity(forest_fit(table, "y", config, 1), table, 1);
    for (std::size_t i = 0; i < rows; ++i) {
      ASSERT_EQ(p.at(i, i), 1.0);
      for (std::size_t j = 0; j < rows; ++j) {
        ASSERT_EQ(p.at(i, j), p.at(j, i));
        const double scaled = p.at(i, j) * static_cast<double>(trees);
        ASSERT_NEAR(scaled, std::round(scaled), 1e-9);
      }
    }
  }
}

TEST(ForestProximity, NearRowsCloserThanFarRows) {
  auto table = single_driver(300, 3, 17, [](double x) { return 10.0 * x; });
  ForestConfig config;
  config.trees = 60;
  const auto p = forest_proximity(forest_fit(table, "y", config), table);
  std::mt19937_64 rng(99);
  double near_sum = 0.0, far_sum = 0.0;
  std::size_t near_n = 0, far_n = 0;
  while (near_n < 200 || far_n < 200) {
    const std::size_t i = rng() % table.rows();
    const std::size_t j = rng() % table.rows();
    if (i == j) continue;
    const double gap = std::abs(table.at(i, 0) - table.at(j, 0));
    if (gap < 0.05 && near_n < 200) {
      near_sum += p.at(i, j);
      ++near_n;
    } else if (gap > 0.5 && far_n < 200) {
      far_sum += p.at(i, j);
      ++far_n;
    }
  }
  EXPECT_GT(near_sum / 200.0, far_sum / 200.0);
}

TEST(ForestProximity, PoolsTreesAcrossModels) {
  auto table = single_driver(60, 1, 2, [](double x) { return x; });
  ForestConfig config;
  config.trees = 4;
  std::vector<ForestModel> models{forest_fit(table, "y", config)};
  config.trees = 6;
  config.seed = 7;
  models.push_back(forest_fit(table, "y", config));
  const auto pooled = forest_proximity(models, table);
  const auto a = forest_proximity(models[0], table);
  const auto b = forest_proximity(models[1], table);
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (std::size_t j = 0; j < table.rows(); ++j) {
      ASSERT_NEAR(pooled.at(i, j), (4.0 * a.at(i, j) + 6.0 * b.at(i, j)) / 10.0, 1e-12);
    }
  }
}

TEST(ForestTrain, TunesAndReportsHeldOutError) {
  auto table = single_driver(200, 2, 8, [](double x) { return 1.0 + x; });
  TuningOptions tuning;
  tuning.tree_grid = {10, 20};
  tuning.depth_grid = {2, 6};
  const auto report = forest_train(table, "y", ForestConfig{}, tuning);
  EXPECT_EQ(report.grid.size(), 4u);
  EXPECT_EQ(report.test_ids.size(), 20u);
  EXPECT_EQ(report.train_ids.size(), 180u);
  std::set<std::string> overlap(report.train_ids.begin(), report.train_ids.end());
  for (const auto& id : report.test_ids) EXPECT_EQ(overlap.count(id), 0u);
  EXPECT_LT(report.test_rmse, 0.1);
  EXPECT_LT(report.test_mape, 0.1);
  EXPECT_GE(report.model.trees.size(), 10u);
}
