#include "strapsim/eval/ranking.hpp"

#include <cmath>
#include <ostream>
#include <unordered_map>

#include "strapsim/error.hpp"
#include "strapsim/ingest/csv.hpp"
#include "strapsim/util/parallel.hpp"
#include "strapsim/util/text.hpp"

namespace strapsim::eval {

RankingStudy etf_ranking_study(std::span<const WeightedSet> sets, const SimilarityMatrix* s,
                               std::span<const ingest::ReturnSeries> returns,
                               std::span<const metrics::Metric> which, const RankingOptions& options) {
  const std::size_t n = sets.size();
  if (n < 4) throw Error(ErrorCode::TooShort, "ranking study needs at least 4 entities");
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t r = 0; r < returns.size(); ++r) by_id.emplace(returns[r].id, r);
  std::vector<const ingest::ReturnSeries*> series(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = by_id.find(sets[i].label());
    if (it == by_id.end()) {
      throw Error(ErrorCode::MissingReturns, "no return series for '" + sets[i].label() + "'");
    }
    series[i] = &returns[it->second];
  }

  RankingStudy study;
  for (const auto& set : sets) study.entities.push_back(set.label());
  study.return_correlation.assign(n * n, NAN);
  for (std::size_t i = 0; i < n; ++i) {
    study.return_correlation[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (auto c = return_correlation(*series[i], *series[j], options.min_overlap)) {
        study.return_correlation[i * n + j] = study.return_correlation[j * n + i] = *c;
      }
    }
  }

  for (metrics::Metric m : which) {
    const auto scores = metrics::pairwise_matrix(sets, s, m, options.strapsim, options.threads);
    MetricRanking ranking;
    ranking.metric = m;
    ranking.entities.resize(n);
    util::parallel_for(n, options.threads, [&](std::size_t i) {
      std::vector<double> a, b;
      for (std::size_t j = 0; j < n; ++j) {
        const double c = study.return_correlation[i * n + j];
        if (j == i || std::isnan(c)) continue;
        a.push_back(scores.at(i, j).score);
        b.push_back(c);
      }
      ranking.entities[i].entity = sets[i].label();
      try {
        ranking.entities[i].result = spearman(a, b, options.spearman);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ConstantInput && e.code() != ErrorCode::TooShort) throw;
      }
    });
    std::size_t sig5 = 0, sig10 = 0;
    for (const auto& e : ranking.entities) {
      if (!e.result) continue;
      ++ranking.ranked;
      ranking.mean_rho += e.result->rho;
      ranking.mean_p += e.result->p_value;
      sig5 += e.result->p_value < 0.05;
      sig10 += e.result->p_value < 0.10;
    }
    if (ranking.ranked > 0) {
      const double k = static_cast<double>(ranking.ranked);
      ranking.mean_rho /= k;
      ranking.mean_p /= k;
      ranking.pct_significant_5 = 100.0 * static_cast<double>(sig5) / k;
      ranking.pct_significant_10 = 100.0 * static_cast<double>(sig10) / k;
    } else {
      ranking.mean_rho = ranking.mean_p = NAN;
    }
    study.rankings.push_back(std::move(ranking));
  }
  return study;
}

namespace {

nlohmann::json number_or_null(double v) { return std::isnan(v) ? nlohmann::json() : nlohmann::json(v); }

std::string cell(double v) { return std::isnan(v) ? std::string() : util::format_double(v); }

}  // namespace

nlohmann::json to_json(const RankingStudy& study) {
  nlohmann::json rankings = nlohmann::json::array();
  for (const auto& r : study.rankings) {
    nlohmann::json entities = nlohmann::json::array();
    for (const auto& e : r.entities) {
      entities.push_back({{"entity", e.entity},
                          {"rho", e.result ? nlohmann::json(e.result->rho) : nlohmann::json()},
                          {"p_value", e.result ? nlohmann::json(e.result->p_value) : nlohmann::json()}});
    }
    rankings.push_back({{"metric", metrics::name(r.metric)},
                        {"avg_coefficient", number_or_null(r.mean_rho)},
                        {"avg_p_value", number_or_null(r.mean_p)},
                        {"pct_significant_5", r.pct_significant_5},
                        {"pct_significant_10", r.pct_significant_10},
                        {"entities_ranked", r.ranked},
                        {"entities", std::move(entities)}});
  }
  return {{"entities", study.entities}, {"rankings", std::move(rankings)}};
}

void write_ranking_table_csv(std::ostream& out, const RankingStudy& study) {
  out << "metric,avg_coefficient,avg_p_value,pct_significant_5,pct_significant_10,entities_ranked\n";
  for (const auto& r : study.rankings) {
    const std::string cells[] = {std::string(metrics::name(r.metric)), cell(r.mean_rho), cell(r.mean_p),
                                 util::format_double(r.pct_significant_5),
                                 util::format_double(r.pct_significant_10), std::to_string(r.ranked)};
    ingest::write_csv_row(out, cells);
  }
}

void write_ranking_entities_csv(std::ostream& out, const RankingStudy& study) {
  out << "entity,metric,rho,p_value\n";
  for (const auto& r : study.rankings) {
    for (const auto& e : r.entities) {
      const std::string cells[] = {e.entity, std::string(metrics::name(r.metric)),
                                   e.result ? util::format_double(e.result->rho) : "",
                                   e.result ? util::format_double(e.result->p_value) : ""};
      ingest::write_csv_row(out, cells);
    }
  }
}

}  // namespace strapsim::eval
