#include "strapsim/eval/experiments.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "strapsim/constituent/tfidf.hpp"
#include "strapsim/error.hpp"
#include "strapsim/ingest/csv.hpp"
#include "strapsim/util/random.hpp"
#include "strapsim/util/text.hpp"

namespace strapsim::eval {

std::vector<metrics::Metric> all_metrics() {
  return {metrics::kAllMetrics.begin(), metrics::kAllMetrics.end()};
}

std::vector<WeightedSet> table_as_sets(const constituent::FeatureTable& scaled, bool normalize) {
  std::vector<WeightedSet> sets;
  sets.reserve(scaled.rows());
  for (std::size_t r = 0; r < scaled.rows(); ++r) {
    sets.push_back(constituent::row_as_weighted_set(scaled, r, normalize));
  }
  return sets;
}

namespace {

std::vector<double> scores_of(const metrics::PairwiseMatrix& m) {
  std::vector<double> out(m.cells.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = m.cells[i].score;
  return out;
}

template <typename Run>
ToyExperiment run_toy(const constituent::FeatureTable& table, const std::string& dataset, Task task,
                      const ToyOptions& options, Run&& run) {
  const auto scaled = constituent::max_scale(table);
  ToyExperiment out;
  out.dataset = dataset;
  out.task = task;
  out.feature_similarity = constituent::feature_correlation_matrix(scaled);
  const auto sets = table_as_sets(scaled, options.normalize);

  std::vector<std::size_t> ks = options.k_sweep;
  if (std::find(ks.begin(), ks.end(), options.cv.k) == ks.end()) ks.push_back(options.cv.k);
  std::sort(ks.begin(), ks.end());

  for (metrics::Metric m : options.metrics) {
    const auto pairs = metrics::pairwise_matrix(sets, &out.feature_similarity, m, options.strapsim,
                                                options.threads);
    const auto similarity = scores_of(pairs);
    for (std::size_t k : ks) {
      CvConfig cv = options.cv;
      cv.k = k;
      EvalReport report = run(similarity, cv);
      report.dataset = dataset;
      report.metric = std::string(metrics::name(m));
      if (k == options.cv.k) out.table.push_back(report);
      out.sweep.push_back(std::move(report));
    }
  }
  return out;
}

}  // namespace

ToyExperiment run_toy_classification(const constituent::FeatureTable& table, const std::string& dataset,
                                     const ToyOptions& options) {
  if (table.labels.size() != table.rows()) {
    throw Error(ErrorCode::InvalidArgument, dataset + " has no class labels");
  }
  return run_toy(table, dataset, Task::Classification, options,
                 [&](const std::vector<double>& similarity, const CvConfig& cv) {
                   return cross_validate_classification(similarity, table.labels, cv);
                 });
}

ToyExperiment run_toy_regression(const constituent::FeatureTable& table, const std::string& target,
                                 const std::string& dataset, const ToyOptions& options) {
  const auto t = table.find_target(target);
  if (!t) throw Error(ErrorCode::TargetMissing, "no target column '" + target + "' in " + dataset);
  const auto targets = table.target_column(*t);
  return run_toy(table, dataset, Task::Regression, options,
                 [&](const std::vector<double>& similarity, const CvConfig& cv) {
                   return cross_validate_regression(similarity, targets, cv);
                 });
}

// ---- movies ----

namespace {

struct IndexedRating {
  std::size_t user;
  std::size_t movie;
  double rating;
};

std::vector<std::size_t> pick_users(std::size_t total, std::size_t wanted, std::uint64_t seed) {
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (wanted == 0 || wanted >= total) return order;
  util::Rng rng(util::derive_seed(seed, 0x05e75));
  util::shuffle(order, rng);
  order.resize(wanted);
  std::sort(order.begin(), order.end());
  return order;
}

WeightedSet profile(const std::string& user, const std::vector<std::string>& movie_ids,
                    const std::vector<IndexedRating>& ratings, bool normalize) {
  std::vector<std::pair<std::string, double>> entries;
  entries.reserve(ratings.size());
  for (const auto& r : ratings) entries.emplace_back(movie_ids[r.movie], r.rating);
  return make_weighted_set(user, std::move(entries), normalize);
}

}  // namespace

MovieExperiment run_movie_experiment(std::span<const ingest::Rating> ratings,
                                     const std::vector<std::pair<std::string, std::string>>& corpus,
                                     const MovieOptions& options) {
  if (options.k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");

  std::vector<ingest::Rating> capped;
  if (options.movies > 0) {
    std::unordered_map<std::string, std::size_t> count;
    for (const auto& r : ratings) ++count[r.movie];
    std::vector<std::pair<std::string, std::size_t>> ranked(count.begin(), count.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    ranked.resize(std::min(ranked.size(), options.movies));
    std::unordered_set<std::string> keep;
    for (const auto& [movie, n] : ranked) keep.insert(movie);
    for (const auto& r : ratings) {
      if (keep.count(r.movie)) capped.push_back(r);
    }
    ratings = capped;
  }

  std::vector<std::string> all_users;
  std::unordered_map<std::string, std::size_t> user_index;
  for (const auto& r : ratings) {
    if (user_index.emplace(r.user, all_users.size()).second) all_users.push_back(r.user);
  }
  const auto picked = pick_users(all_users.size(), options.users, options.seed);
  std::vector<std::size_t> slot(all_users.size(), SIZE_MAX);
  MovieExperiment out;
  for (std::size_t u : picked) {
    slot[u] = out.users.size();
    out.users.push_back(all_users[u]);
  }
  const std::size_t n_users = out.users.size();

  std::vector<std::string> movie_ids;
  std::unordered_map<std::string, std::size_t> movie_index;
  std::vector<IndexedRating> kept;
  for (const auto& r : ratings) {
    const std::size_t u = slot[user_index.at(r.user)];
    if (u == SIZE_MAX) continue;
    auto [it, fresh] = movie_index.emplace(r.movie, movie_ids.size());
    if (fresh) movie_ids.push_back(r.movie);
    kept.push_back({u, it->second, r.rating});
  }
  out.ratings_used = kept.size();
  out.movies_used = movie_ids.size();
  spdlog::info("movies: {} users, {} ratings, {} movies", n_users, kept.size(), movie_ids.size());

  const auto index = constituent::tfidf_build(corpus);
  const auto movie_sim = constituent::tfidf_cosine_matrix(index, movie_ids, options.threads);

  const auto fold = fold_assignment(kept.size(), options.folds, options.seed);
  for (metrics::Metric m : options.metrics) {
    std::vector<double> predicted(kept.size());
    for (std::size_t f = 0; f < options.folds; ++f) {
      std::vector<std::vector<IndexedRating>> train(n_users);
      std::vector<std::vector<std::pair<std::size_t, double>>> raters(movie_ids.size());
      for (std::size_t i = 0; i < kept.size(); ++i) {
        if (fold[i] == f) continue;
        train[kept[i].user].push_back(kept[i]);
        raters[kept[i].movie].emplace_back(kept[i].user, kept[i].rating);
      }
      // Users with nothing left in training have no profile to compare.
      std::vector<WeightedSet> sets;
      std::vector<std::size_t> set_of(n_users, SIZE_MAX);
      std::vector<double> user_mean(n_users, 0.0);
      double global_sum = 0.0;
      std::size_t global_count = 0;
      for (std::size_t u = 0; u < n_users; ++u) {
        if (train[u].empty()) continue;
        double sum = 0.0;
        for (const auto& r : train[u]) sum += r.rating;
        user_mean[u] = sum / static_cast<double>(train[u].size());
        global_sum += sum;
        global_count += train[u].size();
        set_of[u] = sets.size();
        sets.push_back(profile(out.users[u], movie_ids, train[u], options.normalize));
      }
      const double global_mean = global_count ? global_sum / static_cast<double>(global_count) : 0.0;
      const auto pairs = metrics::pairwise_matrix(sets, &movie_sim, m, options.strapsim, options.threads);
      const std::size_t n_sets = sets.size();

      for (std::size_t i = 0; i < kept.size(); ++i) {
        if (fold[i] != f) continue;
        const auto& q = kept[i];
        const std::size_t qs = set_of[q.user];
        std::vector<double> pool_scores, pool_targets;
        if (qs != SIZE_MAX) {
          for (const auto& [v, rating] : raters[q.movie]) {
            if (v == q.user) continue;
            pool_scores.push_back(pairs.cells[qs * n_sets + set_of[v]].score);
            pool_targets.push_back(rating);
          }
        }
        if (pool_scores.empty()) {
          predicted[i] = qs != SIZE_MAX ? user_mean[q.user] : global_mean;
          continue;
        }
        predicted[i] = weighted_mean(top_k(pool_scores, options.k), pool_targets);
      }
    }
    std::vector<double> truth(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) truth[i] = kept[i].rating;
    EvalReport report;
    report.task = Task::Regression;
    report.dataset = "movies";
    report.metric = std::string(metrics::name(m));
    report.k = options.k;
    report.metrics = error_metrics(predicted, truth);
    for (std::size_t f = 0; f < options.folds; ++f) {
      std::vector<double> p, t;
      for (std::size_t i = 0; i < kept.size(); ++i) {
        if (fold[i] != f) continue;
        p.push_back(predicted[i]);
        t.push_back(truth[i]);
      }
      report.folds.push_back({f, error_metrics(p, t)});
    }
    out.table.push_back(std::move(report));
  }

  // Residuals on the complete, normalized profiles.
  std::vector<std::vector<IndexedRating>> full(n_users);
  for (const auto& r : kept) full[r.user].push_back(r);
  std::vector<WeightedSet> sets;
  for (std::size_t u = 0; u < n_users; ++u) sets.push_back(profile(out.users[u], movie_ids, full[u], true));
  for (metrics::Metric m : options.metrics) {
    const auto pairs = metrics::pairwise_matrix(sets, &movie_sim, m, options.strapsim, options.threads);
    MovieResiduals res;
    res.metric = m;
    res.per_user.assign(n_users, 0.0);
    for (std::size_t u = 0; u < n_users && n_users > 1; ++u) {
      double sum = 0.0;
      for (std::size_t v = 0; v < n_users; ++v) {
        if (v != u) sum += pairs.at(u, v).residual;
      }
      res.per_user[u] = sum / static_cast<double>(n_users - 1);
    }
    if (n_users > 0) {
      res.mean = std::accumulate(res.per_user.begin(), res.per_user.end(), 0.0) / static_cast<double>(n_users);
    }
    out.residuals.push_back(std::move(res));
  }
  return out;
}

void write_movie_residuals_csv(std::ostream& out, const MovieExperiment& experiment) {
  std::vector<std::string> cells{"user"};
  for (const auto& r : experiment.residuals) cells.emplace_back(metrics::name(r.metric));
  ingest::write_csv_row(out, cells);
  for (std::size_t u = 0; u < experiment.users.size(); ++u) {
    cells = {experiment.users[u]};
    for (const auto& r : experiment.residuals) cells.push_back(util::format_double(r.per_user[u]));
    ingest::write_csv_row(out, cells);
  }
}

void write_summary_table_csv(std::ostream& out, const std::vector<EvalReport>& reports) {
  const bool classification = !reports.empty() && reports.front().task == Task::Classification;
  const std::vector<std::string> columns =
      classification ? std::vector<std::string>{"accuracy", "f1"} : std::vector<std::string>{"rmse", "mape", "mae"};
  std::vector<std::string> cells{"metric"};
  cells.insert(cells.end(), columns.begin(), columns.end());
  ingest::write_csv_row(out, cells);
  for (const auto& r : reports) {
    cells = {r.metric};
    for (const auto& c : columns) {
      auto it = r.metrics.find(c);
      cells.push_back(it == r.metrics.end() ? "" : util::format_double(it->second));
    }
    ingest::write_csv_row(out, cells);
  }
}

// ---- synthetic universes ----

SyntheticStudy run_synthetic_study(const SyntheticStudyOptions& options) {
  SyntheticStudy out;
  out.universe = ingest::generate_synthetic_universe(options.spec);

  constituent::EncodeOptions encode;
  encode.id_column = "id";
  encode.target_columns = ingest::kSyntheticTargets;
  const auto table = constituent::encode(out.universe.constituents, encode);

  std::vector<constituent::ForestModel> models;
  for (const auto& target : ingest::kSyntheticTargets) {
    models.push_back(constituent::forest_fit(table, target, options.forest, options.threads));
  }

  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < table.rows(); ++r) row_of.emplace(table.row_ids[r], r);
  std::vector<std::size_t> held;
  std::vector<bool> seen(table.rows(), false);
  for (const auto& set : out.universe.holdings) {
    for (const auto& id : set.ids()) {
      const std::size_t r = row_of.at(id.str());
      if (!seen[r]) {
        seen[r] = true;
        held.push_back(r);
      }
    }
  }
  out.proximity = constituent::forest_proximity(models, table.select_rows(held), options.threads);

  RankingOptions ranking;
  ranking.strapsim = options.strapsim;
  ranking.threads = options.threads;
  out.ranking = etf_ranking_study(out.universe.holdings, &out.proximity, out.universe.portfolio_returns,
                                  options.metrics, ranking);
  return out;
}

PlantedStudy run_planted_study(const PlantedStudyOptions& options) {
  PlantedStudy out;
  out.universe = ingest::generate_planted_universe(options.portfolios, options.months, options.seed);
  RankingOptions ranking;
  ranking.strapsim = options.strapsim;
  ranking.threads = options.threads;
  out.ranking = etf_ranking_study(out.universe.holdings, &out.universe.similarity, out.universe.returns,
                                  options.metrics, ranking);
  return out;
}

nlohmann::json to_json(const ToyExperiment& experiment) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& r : experiment.table) table.push_back(to_json(r));
  nlohmann::json sweep = nlohmann::json::array();
  for (const auto& r : experiment.sweep) {
    sweep.push_back({{"metric", r.metric}, {"k", r.k}, {"metrics", r.metrics}});
  }
  return {{"dataset", experiment.dataset},
          {"task", task_name(experiment.task)},
          {"table", std::move(table)},
          {"sweep", std::move(sweep)}};
}

nlohmann::json to_json(const MovieExperiment& experiment) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& r : experiment.table) table.push_back(to_json(r));
  nlohmann::json residuals = nlohmann::json::object();
  for (const auto& r : experiment.residuals) residuals[std::string(metrics::name(r.metric))] = r.mean;
  return {{"dataset", "movies"},
          {"users", experiment.users.size()},
          {"ratings", experiment.ratings_used},
          {"movies", experiment.movies_used},
          {"table", std::move(table)},
          {"mean_residual", std::move(residuals)}};
}

}  // namespace strapsim::eval
