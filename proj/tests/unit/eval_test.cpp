#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "strapsim/error.hpp"
#include "strapsim/eval/knn.hpp"
#include "strapsim/eval/ranking.hpp"
#include "strapsim/eval/stats.hpp"
#include "strapsim/ingest/synthetic.hpp"
#include "strapsim/metrics.hpp"

using namespace strapsim;
using namespace strapsim::eval;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Internal;
}

// Two-sided tail of Student-t by Simpson integration of the density.
double t_two_sided_p(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI);
  auto density = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
  const int n = 200000;
  const double h = std::abs(t) / n;
  double sum = density(0) + density(std::abs(t));
  for (int i = 1; i < n; ++i) sum += density(i * h) * (i % 2 ? 4 : 2);
  const double central = sum * h / 3;  // integral over [0, |t|]
  return 1.0 - 2.0 * central;
}

WeightedSet singleton(const std::string& label, const std::string& id) {
  return make_weighted_set(label, {{id, 1.0}}, false);
}

}  // namespace

// ---- KNN primitives ----

TEST(Knn, WeightedMean) {
  const std::vector<double> targets{2, 4};
  const std::vector<Neighbor> n{{0, 0.9}, {1, 0.1}};
  EXPECT_NEAR(weighted_mean(n, targets), 2.2, 1e-12);
  const std::vector<Neighbor> equal{{0, 1}, {1, 1}};
  EXPECT_DOUBLE_EQ(weighted_mean(equal, targets), 3.0);
  const std::vector<Neighbor> zero{{0, 0}, {1, 0}};
  EXPECT_DOUBLE_EQ(weighted_mean(zero, targets), 3.0);
  EXPECT_EQ(code_of([&] { weighted_mean({}, targets); }), ErrorCode::EmptyPool);
}

TEST(Knn, VoteTieBreaks) {
  const std::vector<std::string> labels{"B", "A", "A", "B"};
  const std::vector<Neighbor> sum_wins{{0, 0.9}, {1, 0.8}};
  EXPECT_EQ(vote(sum_wins, labels), "B");
  const std::vector<Neighbor> a_first{{1, 0.9}, {0, 0.8}};
  EXPECT_EQ(vote(a_first, labels), "A");
  const std::vector<Neighbor> full_tie{{0, 0.5}, {1, 0.5}};
  EXPECT_EQ(vote(full_tie, labels), "A");
  const std::vector<Neighbor> majority{{0, 0.9}, {1, 0.5}, {2, 0.5}};
  EXPECT_EQ(vote(majority, labels), "A");
}

TEST(Knn, TopKKeepsPoolOrderOnTies) {
  const std::vector<double> scores{0.5, 0.9, 0.5, 0.1};
  const auto top = top_k(scores, 3);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0].index, 1u);
  EXPECT_EQ(top[1].index, 0u);
  EXPECT_EQ(top[2].index, 2u);
  EXPECT_EQ(top_k(scores, 10).size(), 4u);
  EXPECT_EQ(code_of([&] { top_k(scores, 0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { top_k({}, 1); }), ErrorCode::EmptyPool);
}

TEST(Knn, ClassifyAndRegressWithCallback) {
  const auto query = singleton("q", "x");
  const std::vector<LabeledSet> pool{{singleton("p1", "y"), "B"}, {singleton("p2", "x"), "A"}, {singleton("p3", "z"), "B"}};
  const SetSimilarity jaccard = [](const WeightedSet& a, const WeightedSet& b) {
    return metrics::jaccard(a, b).score;
  };
  EXPECT_EQ(knn_classify(query, pool, jaccard, 1), "A");
  EXPECT_EQ(knn_classify(query, pool, jaccard, 3), "B");
  EXPECT_EQ(code_of([&] { knn_classify(query, {}, jaccard, 1); }), ErrorCode::EmptyPool);

  const std::vector<TargetSet> targets{{singleton("p1", "y"), 10.0}, {singleton("p2", "x"), 1.0}};
  EXPECT_DOUBLE_EQ(knn_regress(query, targets, jaccard, 2), 1.0);
}

TEST(Knn, RegressionStaysWithinNeighbourRange) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<double> targets(n);
    std::vector<Neighbor> neighbors;
    for (std::size_t i = 0; i < n; ++i) {
      targets[i] = u(rng) * 200 - 100;
      neighbors.push_back({i, trial % 5 == 0 ? 0.0 : u(rng)});
    }
    const double y = weighted_mean(neighbors, targets);
    const auto [lo, hi] = std::minmax_element(targets.begin(), targets.end());
    EXPECT_GE(y, *lo - 1e-9);
    EXPECT_LE(y, *hi + 1e-9);
  }
}

// ---- error metrics ----

TEST(ErrorMetrics, DirectEvaluation) {
  const std::vector<double> pred{3, 5}, truth{4, 4};
  const auto m = error_metrics(pred, truth);
  EXPECT_DOUBLE_EQ(m.at("mae"), 1.0);
  EXPECT_DOUBLE_EQ(m.at("rmse"), 1.0);
  EXPECT_DOUBLE_EQ(m.at("mape"), 25.0);
  const auto perfect = error_metrics(truth, truth);
  EXPECT_EQ(perfect.at("rmse"), 0.0);
  const std::vector<std::string> labels{"a", "b", "a"};
  EXPECT_EQ(error_metrics(labels, labels).at("accuracy"), 1.0);
  const std::vector<std::string> one_class{"a", "a"};
  EXPECT_EQ(error_metrics(one_class, one_class).at("f1"), 1.0);
}

TEST(ErrorMetrics, Errors) {
  const std::vector<double> two{1, 2}, three{1, 2, 3}, zero{0, 1};
  EXPECT_EQ(code_of([&] { regression_scores(two, three); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([&] { regression_scores(two, zero); }), ErrorCode::ZeroTruthForMape);
  EXPECT_FALSE(regression_scores(two, zero, false).mape.has_value());
  EXPECT_EQ(code_of([] { regression_scores({}, {}); }), ErrorCode::TooShort);
  const std::vector<std::string> a{"x"}, b{"x", "y"};
  EXPECT_EQ(code_of([&] { classification_scores(a, b); }), ErrorCode::LengthMismatch);
}

TEST(ErrorMetrics, MacroF1AgainstHandCount) {
  // truth a a b b c, pred a b b b a
  const std::vector<std::string> truth{"a", "a", "b", "b", "c"}, pred{"a", "b", "b", "b", "a"};
  const auto s = classification_scores(pred, truth);
  EXPECT_DOUBLE_EQ(s.accuracy, 0.6);
  // a: p 1/2 r 1/2 f 1/2; b: p 2/3 r 1 f 4/5; c: f 0
  EXPECT_NEAR(s.macro_f1, (0.5 + 0.8 + 0.0) / 3, 1e-12);
}

TEST(ErrorMetrics, MacroF1EqualsAccuracyOnSymmetricBalancedConfusion) {
  for (int wrong = 0; wrong <= 10; ++wrong) {
    std::vector<std::string> truth, pred;
    for (int i = 0; i < 10; ++i) {
      truth.push_back("p");
      pred.push_back(i < wrong ? "n" : "p");
      truth.push_back("n");
      pred.push_back(i < wrong ? "p" : "n");
    }
    const auto s = classification_scores(pred, truth);
    EXPECT_NEAR(s.macro_f1, s.accuracy, 1e-12) << wrong;
  }
}

TEST(ErrorMetrics, ScoresStayInRange) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 30;
    std::vector<std::string> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = std::string(1, static_cast<char>('a' + rng() % 4));
      pred[i] = std::string(1, static_cast<char>('a' + rng() % 4));
    }
    const auto s = classification_scores(pred, truth);
    EXPECT_GE(s.accuracy, 0.0);
    EXPECT_LE(s.accuracy, 1.0);
    EXPECT_GE(s.macro_f1, 0.0);
    EXPECT_LE(s.macro_f1, 1.0);
  }
}

// ---- Spearman ----

TEST(Spearman, Examples) {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{1, 3, 2, 4, 5}, rev{5, 4, 3, 2, 1};
  const auto r = spearman(a, b);
  EXPECT_NEAR(r.rho, 0.9, 1e-12);
  const double t = 0.9 * std::sqrt(3.0 / (1 - 0.81));
  EXPECT_NEAR(r.p_value, t_two_sided_p(t, 3), 1e-6);
  const auto same = spearman(a, a);
  EXPECT_DOUBLE_EQ(same.rho, 1.0);
  EXPECT_EQ(same.p_value, 0.0);
  const auto opposite = spearman(a, rev);
  EXPECT_DOUBLE_EQ(opposite.rho, -1.0);
  EXPECT_EQ(opposite.p_value, 0.0);
}

TEST(Spearman, PValueMatchesIntegratedStudentT) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + rng() % 30;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = z(rng);
      b[i] = a[i] + 2 * z(rng);
    }
    const auto r = spearman(a, b);
    EXPECT_NEAR(r.rho, oracle::spearman_no_ties(a, b), 1e-12);
    const double t = r.rho * std::sqrt((n - 2.0) / (1 - r.rho * r.rho));
    EXPECT_NEAR(r.p_value, t_two_sided_p(t, n - 2.0), 1e-6);
  }
}

TEST(Spearman, TiesUseAverageRanks) {
  const std::vector<double> v{10, 20, 20, 30};
  EXPECT_EQ(fractional_ranks(v), (std::vector<double>{1, 2.5, 2.5, 4}));
  // Pearson of (1, 2.5, 2.5, 4) and (1, 2, 3, 4) = 4.5 / sqrt(4.5 * 5)
  const std::vector<double> w{1, 2, 3, 4};
  EXPECT_NEAR(spearman(v, w).rho, 4.5 / std::sqrt(4.5 * 5.0), 1e-12);
}

TEST(Spearman, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng() % 40;
    std::vector<double> a(n), b(n), ea(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = std::round(z(rng) * 3);  // ties on purpose
      b[i] = z(rng);
      ea[i] = std::exp(a[i]);
    }
    if (std::all_of(a.begin(), a.end(), [&](double x) { return x == a[0]; })) continue;
    EXPECT_NEAR(spearman(a, b).rho, spearman(ea, b).rho, 1e-9);
  }
}

TEST(Spearman, Errors) {
  const std::vector<double> two{1, 2}, three{1, 2, 3}, flat{1, 1, 1};
  EXPECT_EQ(code_of([&] { spearman(two, two); }), ErrorCode::TooShort);
  EXPECT_EQ(code_of([&] { spearman(two, three); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([&] { spearman(flat, three); }), ErrorCode::ConstantInput);
}

TEST(Spearman, ExactPermutationForSmallSamples) {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{1, 3, 2, 4, 5};
  // Of the 120 permutations, those with rho >= 0.9 are the identity and the
  // four adjacent swaps; mirrored for rho <= -0.9.
  const auto r = spearman(a, b, {.exact_permutation = true});
  EXPECT_NEAR(r.p_value, 10.0 / 120.0, 1e-12);
}

// ---- return correlation ----

TEST(ReturnCorrelation, OverlapRules) {
  ingest::ReturnSeries a{"a", {}, {}}, b{"b", {}, {}};
  for (int p = 0; p < 14; ++p) {
    a.periods.push_back(p);
    a.returns.push_back(p % 3);
    b.periods.push_back(p + 3);  // 11 shared periods
    b.returns.push_back((p + 3) % 3);
  }
  EXPECT_FALSE(return_correlation(a, b).has_value());
  const auto r = return_correlation(a, b, 11);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(*r, 1.0, 1e-12);
  ingest::ReturnSeries flat{"f", a.periods, std::vector<double>(14, 0.01)};
  EXPECT_FALSE(return_correlation(a, flat, 2).has_value());
}

// ---- cross-validation ----

TEST(CrossValidation, FoldSizes) {
  const auto folds = fold_assignment(150, 10, 42);
  std::vector<std::size_t> sizes(10, 0);
  for (auto f : folds) ++sizes.at(f);
  for (auto s : sizes) EXPECT_EQ(s, 15u);
  const auto uneven = fold_assignment(23, 5, 1);
  std::vector<std::size_t> counts(5, 0);
  for (auto f : uneven) ++counts.at(f);
  EXPECT_LE(*std::max_element(counts.begin(), counts.end()) - *std::min_element(counts.begin(), counts.end()), 1u);
  EXPECT_EQ(code_of([] { fold_assignment(150, 151, 42); }), ErrorCode::TooFewRows);
  EXPECT_EQ(code_of([] { fold_assignment(150, 1, 42); }), ErrorCode::InvalidArgument);
  EXPECT_NE(fold_assignment(150, 10, 42), fold_assignment(150, 10, 43));
}

TEST(CrossValidation, DeterministicAndSane) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u;
  const std::size_t n = 60;
  std::vector<double> sim(n * n);
  std::vector<std::string> labels(n);
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = i % 3 == 0 ? "x" : "y";
    targets[i] = 1.0 + static_cast<double>(i % 3);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) sim[i * n + j] = (i % 3 == j % 3 ? 0.5 : 0.0) + 0.4 * u(rng);
  }
  const CvConfig config{5, 10, 42};
  const auto a = cross_validate_classification(sim, labels, config);
  const auto b = cross_validate_classification(sim, labels, config);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_EQ(a.metrics.at("accuracy"), 1.0);
  EXPECT_EQ(a.folds.size(), 10u);
  const auto r = cross_validate_regression(sim, targets, config);
  EXPECT_EQ(to_json(r).dump(), to_json(cross_validate_regression(sim, targets, config)).dump());
  EXPECT_NEAR(r.metrics.at("rmse"), 0.0, 1e-12);
  std::ostringstream csv;
  const std::vector<EvalReport> reports{a};
  write_report_csv(csv, reports);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "dataset,metric,k,fold,accuracy,f1");
}

TEST(CrossValidation, TestItemNeverSeesItself) {
  // Every item's only perfect match is itself; the pool must exclude it.
  const std::size_t n = 20;
  std::vector<double> sim(n * n, 0.1);
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    sim[i * n + i] = 1.0;
    labels[i] = i < 10 ? "a" : "b";
  }
  const auto report = cross_validate_classification(sim, labels, {1, 10, 3});
  EXPECT_LT(report.metrics.at("accuracy"), 1.0);
}

// ---- ranking study ----

TEST(RankingStudy, PlantedConcordanceRanksPerfectly) {
  const auto u = ingest::generate_planted_universe(20, 26, 42);
  const std::vector<metrics::Metric> which{metrics::Metric::BertScore, metrics::Metric::Strapsim};
  const auto study = etf_ranking_study(u.holdings, &u.similarity, u.returns, which);
  for (const auto& ranking : study.rankings) {
    EXPECT_EQ(ranking.ranked, 20u);
    for (const auto& e : ranking.entities) {
      ASSERT_TRUE(e.result.has_value());
      EXPECT_NEAR(e.result->rho, 1.0, 1e-12) << e.entity;
    }
    EXPECT_EQ(ranking.pct_significant_5, 100.0);
  }
}

TEST(RankingStudy, IndependentReturnsAverageNearZero) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> z(0.0, 0.02);
  const std::size_t n = 12;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("c" + std::to_string(i));
  double total = 0.0;
  std::size_t count = 0;
  const std::vector<metrics::Metric> which{metrics::Metric::Strapsim};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<WeightedSet> sets;
    std::vector<ingest::ReturnSeries> returns;
    std::vector<double> s(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) s[i * n + j] = s[j * n + i] = i == j ? 1.0 : std::uniform_real_distribution<double>()(rng);
    }
    for (std::size_t p = 0; p < n; ++p) {
      std::vector<std::pair<std::string, double>> entries;
      for (std::size_t k = 0; k < 3; ++k) entries.emplace_back(ids[(p + 5 * k) % n], 1.0 + k);
      sets.push_back(make_weighted_set("p" + std::to_string(p), entries, true));
      ingest::ReturnSeries r{sets.back().label(), {}, {}};
      for (int m = 0; m < 26; ++m) {
        r.periods.push_back(m);
        r.returns.push_back(z(rng));
      }
      returns.push_back(r);
    }
    const auto matrix = SimilarityMatrix::square(ids, s);
    const auto study = etf_ranking_study(sets, &matrix, returns, which);
    total += std::abs(study.rankings[0].mean_rho);
    ++count;
  }
  EXPECT_LT(total / static_cast<double>(count), 0.2);
}

TEST(RankingStudy, Errors) {
  const auto u = ingest::generate_planted_universe(6, 26, 1);
  const std::vector<metrics::Metric> which{metrics::Metric::Jaccard};
  auto missing = u.returns;
  missing.pop_back();
  EXPECT_EQ(code_of([&] { etf_ranking_study(u.holdings, &u.similarity, missing, which); }), ErrorCode::MissingReturns);
  const std::span<const WeightedSet> three(u.holdings.data(), 3);
  EXPECT_EQ(code_of([&] { etf_ranking_study(three, &u.similarity, u.returns, which); }), ErrorCode::TooShort);
}

TEST(RankingStudy, ConstantScoresLeaveEntitiesUnranked) {
  // Single-holding portfolios never share a constituent: Jaccard is flat.
  const auto u = ingest::generate_planted_universe(8, 26, 4);
  const std::vector<metrics::Metric> which{metrics::Metric::Jaccard};
  const auto study = etf_ranking_study(u.holdings, &u.similarity, u.returns, which);
  EXPECT_EQ(study.rankings[0].ranked, 0u);
  EXPECT_TRUE(std::isnan(study.rankings[0].mean_rho));
  std::ostringstream table;
  write_ranking_table_csv(table, study);
  EXPECT_EQ(table.str().substr(0, table.str().find('\n')),
            "metric,avg_coefficient,avg_p_value,pct_significant_5,pct_significant_10,entities_ranked");
}
