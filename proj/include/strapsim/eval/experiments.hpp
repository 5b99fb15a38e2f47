#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "strapsim/constituent/features.hpp"
#include "strapsim/constituent/forest.hpp"
#include "strapsim/eval/knn.hpp"
#include "strapsim/eval/ranking.hpp"
#include "strapsim/ingest/datasets.hpp"
#include "strapsim/ingest/synthetic.hpp"
#include "strapsim/metrics.hpp"

namespace strapsim::eval {

inline const std::vector<std::size_t> kDefaultKSweep{1, 3, 5, 10, 20};

std::vector<metrics::Metric> all_metrics();

// ---- toy datasets (Iris, breast cancer, Big Mac) ----

struct ToyOptions {
  CvConfig cv;                                  // cv.k is the k reported in the summary table
  std::vector<std::size_t> k_sweep = kDefaultKSweep;
  bool normalize = false;                       // true: row weights sum to one
  metrics::StrapsimOptions strapsim;
  std::vector<metrics::Metric> metrics = all_metrics();
  std::size_t threads = 0;
};

struct ToyExperiment {
  std::string dataset;
  Task task = Task::Classification;
  SimilarityMatrix feature_similarity;  // cosine between max-scaled feature columns
  std::vector<EvalReport> table;        // one per metric at options.cv.k
  std::vector<EvalReport> sweep;        // one per (metric, k in the sweep)
};

// Rows of a max-scaled table as weighted sets over the feature names. Rows
// whose features are all zero cannot form a set (EmptySet).
std::vector<WeightedSet> table_as_sets(const constituent::FeatureTable& scaled, bool normalize);

// Errors: InvalidArgument when the table has no labels.
ToyExperiment run_toy_classification(const constituent::FeatureTable& table, const std::string& dataset,
                                     const ToyOptions& options);
// Errors: TargetMissing.
ToyExperiment run_toy_regression(const constituent::FeatureTable& table, const std::string& target,
                                 const std::string& dataset, const ToyOptions& options);

// ---- movie ratings ----

struct MovieOptions {
  std::size_t users = 200;  // seeded subsample of raters; 0 keeps everyone
  std::size_t movies = 0;   // keep only the most-rated movies; 0 keeps all
  std::size_t k = 20;
  std::size_t folds = 10;
  std::uint64_t seed = 42;
  bool normalize = false;  // raw ratings are the movie weights
  metrics::StrapsimOptions strapsim;
  std::vector<metrics::Metric> metrics = all_metrics();
  std::size_t threads = 0;
};

struct MovieResiduals {
  metrics::Metric metric;
  std::vector<double> per_user;  // mean residual against every other user
  double mean = 0.0;
};

struct MovieExperiment {
  std::vector<std::string> users;
  std::size_t ratings_used = 0;
  std::size_t movies_used = 0;
  std::vector<EvalReport> table;  // one per metric
  std::vector<MovieResiduals> residuals;
};

/// User-based KNN rating prediction with k-fold CV over ratings. Users are
/// weighted sets of movies, movie similarity is TF-IDF cosine over the
/// metadata text. A held-out rating is predicted from the k most similar
/// users who rated the movie in training, falling back to the user's training
/// mean when nobody did. Residuals are measured on normalized full profiles.
/// Errors: UnknownDocument when a rated movie has no metadata, TooFewRows.
MovieExperiment run_movie_experiment(std::span<const ingest::Rating> ratings,
                                     const std::vector<std::pair<std::string, std::string>>& corpus,
                                     const MovieOptions& options);

// user,<metric>... mean residual per user
void write_movie_residuals_csv(std::ostream& out, const MovieExperiment& experiment);

// ---- Table-3 and Table-4 shaped outputs ----

// metric,accuracy,f1 or metric,rmse,mape,mae
void write_summary_table_csv(std::ostream& out, const std::vector<EvalReport>& reports);

// ---- synthetic ETF universe ----

struct SyntheticStudyOptions {
  ingest::SyntheticUniverseSpec spec;
  constituent::ForestConfig forest;
  metrics::StrapsimOptions strapsim;
  std::vector<metrics::Metric> metrics = all_metrics();
  std::size_t threads = 0;
};

struct SyntheticStudy {
  ingest::SyntheticUniverse universe;
  SimilarityMatrix proximity;  // over the constituents held by some portfolio
  RankingStudy ranking;
};

/// Generates a universe, fits one forest per spread target (oas, yield) on
/// every constituent, pools their proximities over the held constituents and
/// runs the ranking study against the simulated portfolio returns.
SyntheticStudy run_synthetic_study(const SyntheticStudyOptions& options);

struct PlantedStudyOptions {
  std::size_t portfolios = 20;
  std::size_t months = 26;
  std::uint64_t seed = 42;
  metrics::StrapsimOptions strapsim;
  std::vector<metrics::Metric> metrics = all_metrics();
  std::size_t threads = 0;
};

struct PlantedStudy {
  ingest::PlantedUniverse universe;
  RankingStudy ranking;
};

PlantedStudy run_planted_study(const PlantedStudyOptions& options);

nlohmann::json to_json(const ToyExperiment& experiment);
nlohmann::json to_json(const MovieExperiment& experiment);

}  // namespace strapsim::eval
