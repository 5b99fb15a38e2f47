#include "strapsim/eval/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include "strapsim/error.hpp"
#include "strapsim/eval/stats.hpp"
#include "strapsim/ingest/csv.hpp"
#include "strapsim/util/random.hpp"
#include "strapsim/util/text.hpp"

namespace strapsim::eval {

std::vector<Neighbor> top_k(std::span<const double> pool_scores, std::size_t k) {
  if (pool_scores.empty()) throw Error(ErrorCode::EmptyPool, "no candidates to rank");
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  std::vector<Neighbor> all(pool_scores.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = {i, pool_scores[i]};
  const std::size_t keep = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    [](const Neighbor& a, const Neighbor& b) {
                      return a.score > b.score || (a.score == b.score && a.index < b.index);
                    });
  all.resize(keep);
  return all;
}

std::string vote(std::span<const Neighbor> neighbors, std::span<const std::string> pool_labels) {
  if (neighbors.empty()) throw Error(ErrorCode::EmptyPool, "no neighbours to vote");
  std::map<std::string, std::pair<std::size_t, double>> tally;
  for (const auto& n : neighbors) {
    auto& [count, sum] = tally[pool_labels[n.index]];
    ++count;
    sum += n.score;
  }
  // std::map iterates labels in ascending order, so strict comparisons keep
  // the smallest label among full ties.
  auto best = tally.begin();
  for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
    const auto& [count, sum] = it->second;
    if (count > best->second.first || (count == best->second.first && sum > best->second.second)) best = it;
  }
  return best->first;
}

double weighted_mean(std::span<const Neighbor> neighbors, std::span<const double> pool_targets) {
  if (neighbors.empty()) throw Error(ErrorCode::EmptyPool, "no neighbours to average");
  double num = 0.0, den = 0.0, plain = 0.0;
  for (const auto& n : neighbors) {
    num += n.score * pool_targets[n.index];
    den += n.score;
    plain += pool_targets[n.index];
  }
  if (den > 0.0) return num / den;
  return plain / static_cast<double>(neighbors.size());
}

std::string knn_classify(const WeightedSet& query, std::span<const LabeledSet> pool,
                         const SetSimilarity& sim, std::size_t k) {
  std::vector<double> scores;
  std::vector<std::string> labels;
  for (const auto& item : pool) {
    scores.push_back(sim(query, item.set));
    labels.push_back(item.label);
  }
  return vote(top_k(scores, k), labels);
}

double knn_regress(const WeightedSet& query, std::span<const TargetSet> pool, const SetSimilarity& sim,
                   std::size_t k) {
  std::vector<double> scores;
  std::vector<double> targets;
  for (const auto& item : pool) {
    scores.push_back(sim(query, item.set));
    targets.push_back(item.target);
  }
  return weighted_mean(top_k(scores, k), targets);
}

std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 folds");
  if (n < folds) {
    throw Error(ErrorCode::TooFewRows,
                std::to_string(n) + " rows cannot fill " + std::to_string(folds) + " folds");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  util::Rng rng(util::derive_seed(seed, 0xf01d));
  util::shuffle(order, rng);
  std::vector<std::size_t> fold(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold[order[pos]] = pos % folds;
  return fold;
}

std::string_view task_name(Task task) noexcept {
  switch (task) {
    case Task::Classification: return "classification";
    case Task::Regression: return "regression";
    case Task::Ranking: return "ranking";
  }
  return "unknown";
}

namespace {

void check_square(std::size_t cells, std::size_t n) {
  if (cells != n * n) throw Error(ErrorCode::DimensionMismatch, "similarity matrix does not match item count");
}

// Neighbours of `query` among items outside fold `f`, in pool coordinates of `pool`.
std::vector<Neighbor> fold_neighbors(std::span<const double> similarity, std::size_t n, std::size_t query,
                                     const std::vector<std::size_t>& pool, std::size_t k) {
  std::vector<double> scores(pool.size());
  for (std::size_t p = 0; p < pool.size(); ++p) scores[p] = similarity[query * n + pool[p]];
  return top_k(scores, k);
}

template <typename Predict, typename Score>
EvalReport run_folds(std::size_t n, const CvConfig& config, Task task, Predict&& predict, Score&& score) {
  const auto fold = fold_assignment(n, config.folds, config.seed);
  EvalReport report;
  report.task = task;
  report.k = config.k;
  std::vector<std::size_t> all_index;
  for (std::size_t f = 0; f < config.folds; ++f) {
    std::vector<std::size_t> pool, test;
    for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? test : pool).push_back(i);
    for (std::size_t q : test) predict(q, pool);
    report.folds.push_back({f, score(test)});
  }
  all_index.resize(n);
  std::iota(all_index.begin(), all_index.end(), std::size_t{0});
  report.metrics = score(all_index);
  return report;
}

}  // namespace

EvalReport cross_validate_classification(std::span<const double> similarity,
                                         std::span<const std::string> labels, const CvConfig& config) {
  const std::size_t n = labels.size();
  check_square(similarity.size(), n);
  std::vector<std::string> predicted(n);
  auto predict = [&](std::size_t q, const std::vector<std::size_t>& pool) {
    std::vector<std::string> pool_labels;
    pool_labels.reserve(pool.size());
    for (std::size_t p : pool) pool_labels.push_back(labels[p]);
    predicted[q] = vote(fold_neighbors(similarity, n, q, pool, config.k), pool_labels);
  };
  auto score = [&](const std::vector<std::size_t>& items) {
    std::vector<std::string> p, t;
    for (std::size_t i : items) {
      p.push_back(predicted[i]);
      t.push_back(labels[i]);
    }
    return error_metrics(p, t);
  };
  return run_folds(n, config, Task::Classification, predict, score);
}

EvalReport cross_validate_regression(std::span<const double> similarity, std::span<const double> targets,
                                     const CvConfig& config) {
  const std::size_t n = targets.size();
  check_square(similarity.size(), n);
  std::vector<double> predicted(n);
  auto predict = [&](std::size_t q, const std::vector<std::size_t>& pool) {
    std::vector<double> pool_targets;
    pool_targets.reserve(pool.size());
    for (std::size_t p : pool) pool_targets.push_back(targets[p]);
    predicted[q] = weighted_mean(fold_neighbors(similarity, n, q, pool, config.k), pool_targets);
  };
  auto score = [&](const std::vector<std::size_t>& items) {
    std::vector<double> p, t;
    for (std::size_t i : items) {
      p.push_back(predicted[i]);
      t.push_back(targets[i]);
    }
    return error_metrics(p, t);
  };
  return run_folds(n, config, Task::Regression, predict, score);
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : report.folds) folds.push_back({{"fold", f.fold}, {"metrics", f.metrics}});
  return {{"task", task_name(report.task)}, {"dataset", report.dataset}, {"metric", report.metric},
          {"k", report.k}, {"metrics", report.metrics}, {"folds", std::move(folds)}};
}

void write_report_csv(std::ostream& out, std::span<const EvalReport> reports) {
  std::set<std::string> names;
  for (const auto& r : reports) {
    for (const auto& [name, value] : r.metrics) names.insert(name);
  }
  std::vector<std::string> cells{"dataset", "metric", "k", "fold"};
  cells.insert(cells.end(), names.begin(), names.end());
  ingest::write_csv_row(out, cells);
  auto emit = [&](const EvalReport& r, const std::string& fold, const std::map<std::string, double>& m) {
    cells = {r.dataset, r.metric, std::to_string(r.k), fold};
    for (const auto& name : names) {
      auto it = m.find(name);
      cells.push_back(it == m.end() ? "" : util::format_double(it->second));
    }
    ingest::write_csv_row(out, cells);
  };
  for (const auto& r : reports) {
    for (const auto& f : r.folds) emit(r, std::to_string(f.fold), f.metrics);
    emit(r, "all", r.metrics);
  }
}

}  // namespace strapsim::eval
