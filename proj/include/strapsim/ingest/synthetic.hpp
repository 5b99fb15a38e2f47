#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "strapsim/constituent/features.hpp"
#include "strapsim/core.hpp"
#include "strapsim/ingest/io.hpp"

namespace strapsim::ingest {

struct SyntheticUniverseSpec {
  std::size_t n_portfolios = 20;
  std::size_t n_constituents = 2000;
  std::size_t n_factors = 4;
  std::size_t holdings_per_portfolio = 100;
  // In [0, 1]. Portfolios draw from a shared pool that shrinks from the whole
  // universe (0) to exactly holdings_per_portfolio names (1).
  double overlap = 0.3;
  // Strength of each portfolio's preference for its favoured sectors.
  double sector_tilt = 2.0;
  // Loading on factors other than the constituent's own sector.
  double cross_loading = 0.15;
  double noise = 1.0;  // idiosyncratic volatility, in units of 1% per month
  std::size_t months = 26;
  Period first_period = 2022 * 12 + 1;  // 2022-02
  std::uint64_t seed = 42;

  // Errors: InvalidArgument on a count below 1, negative noise, overlap
  // outside [0, 1], more factors than months - 1, or more holdings per
  // portfolio than constituents.
  void validate() const;
};

nlohmann::json to_json(const SyntheticUniverseSpec& spec);
SyntheticUniverseSpec synthetic_spec_from_json(const nlohmann::json& j);

struct SyntheticUniverse {
  std::vector<WeightedSet> holdings;  // normalized weights
  // id, sector, rating (categorical), maturity_days, coupon, amount_issued,
  // age_days, then the two targets oas and yield.
  constituent::RawTable constituents;
  std::vector<ReturnSeries> portfolio_returns;
  std::vector<ReturnSeries> factor_returns;
};

inline const std::vector<std::string> kSyntheticTargets{"oas", "yield"};

/// Constituents belong to one sector each and load on that sector's factor
/// (plus cross_loading noise on the others); bond features and spreads depend
/// on sector and rating. Factor returns are orthogonal within the sample, so
/// portfolios confined to different sectors are uncorrelated at zero noise.
SyntheticUniverse generate_synthetic_universe(const SyntheticUniverseSpec& spec);

struct PlantedUniverse {
  std::vector<WeightedSet> holdings;  // one constituent per portfolio
  SimilarityMatrix similarity;        // over the constituents
  std::vector<ReturnSeries> returns;  // per portfolio
};

/// n single-holding portfolios whose sample return correlations equal the
/// constituent similarity exp(-|x_a - x_b|) exactly (up to rounding), so any
/// metric that is increasing in that similarity ranks perfectly.
/// Errors: InvalidArgument unless 4 <= n < months.
PlantedUniverse generate_planted_universe(std::size_t n, std::size_t months, std::uint64_t seed);

}  // namespace strapsim::ingest
