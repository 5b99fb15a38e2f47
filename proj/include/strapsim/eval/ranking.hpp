#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "strapsim/eval/stats.hpp"
#include "strapsim/ingest/io.hpp"
#include "strapsim/metrics.hpp"

namespace strapsim::eval {

struct EntityRank {
  std::string entity;
  std::optional<SpearmanResult> result;  // empty when the entity's scores are constant
};

struct MetricRanking {
  metrics::Metric metric;
  std::vector<EntityRank> entities;
  std::size_t ranked = 0;  // entities with a defined coefficient
  double mean_rho = 0.0;
  double mean_p = 0.0;
  double pct_significant_5 = 0.0;  // percent of ranked entities with p < 0.05
  double pct_significant_10 = 0.0;
};

struct RankingStudy {
  std::vector<std::string> entities;
  std::vector<double> return_correlation;  // n x n; NaN where undefined
  std::vector<MetricRanking> rankings;
};

struct RankingOptions {
  metrics::StrapsimOptions strapsim;
  SpearmanOptions spearman;
  std::size_t min_overlap = kMinOverlapPeriods;
  std::size_t threads = 0;
};

/// For each entity and metric, Spearman between the entity's scores against
/// every other entity and its return correlations with them (pairs without
/// enough overlapping periods are skipped). Entities whose scores or
/// correlations are constant are left unranked.
/// Errors: MissingReturns(id), TooShort with fewer than 4 entities.
RankingStudy etf_ranking_study(std::span<const WeightedSet> sets, const SimilarityMatrix* s,
                               std::span<const ingest::ReturnSeries> returns,
                               std::span<const metrics::Metric> which, const RankingOptions& options = {});

nlohmann::json to_json(const RankingStudy& study);
// metric,avg_coefficient,avg_p_value,pct_significant_5,pct_significant_10,entities_ranked
void write_ranking_table_csv(std::ostream& out, const RankingStudy& study);
// entity,metric,rho,p_value (empty cells for unranked entities)
void write_ranking_entities_csv(std::ostream& out, const RankingStudy& study);

}  // namespace strapsim::eval
