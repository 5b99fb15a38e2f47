#include "strapsim/ingest/synthetic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "strapsim/error.hpp"
#include "strapsim/util/random.hpp"
#include "strapsim/util/text.hpp"

namespace strapsim::ingest {
namespace {

std::string numbered(const char* prefix, std::size_t k, std::size_t count) {
  const int width = std::max(2, static_cast<int>(std::to_string(count).size()));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, k);
  return buf;
}

// Centered standard normal draws with orthonormal columns.
Eigen::MatrixXd orthonormal_centered(std::size_t rows, std::size_t cols, util::Rng& rng) {
  Eigen::MatrixXd z(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index c = 0; c < z.cols(); ++c)
    for (Eigen::Index r = 0; r < z.rows(); ++r) z(r, c) = util::standard_normal(rng);
  z.rowwise() -= z.colwise().mean();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
  return qr.householderQ() * Eigen::MatrixXd::Identity(z.rows(), z.cols());
}

struct Rating {
  const char* name;
  double spread;  // basis points
  double coupon;  // percent
  double share;   // sampling probability
};

constexpr Rating kRatings[] = {
    {"AAA", 30, 2.5, 0.10}, {"AA", 55, 3.0, 0.20}, {"A", 90, 3.6, 0.35},
    {"BBB", 150, 4.4, 0.30}, {"BB", 280, 5.8, 0.05}};

std::size_t draw_rating(util::Rng& rng) {
  double u = util::uniform01(rng);
  for (std::size_t k = 0; k < std::size(kRatings); ++k) {
    if (u < kRatings[k].share) return k;
    u -= kRatings[k].share;
  }
  return std::size(kRatings) - 1;
}

double round_to(double v, double step) { return std::round(v / step) * step; }

}  // namespace

void SyntheticUniverseSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, "synthetic spec: " + what); };
  if (n_portfolios < 1 || n_constituents < 1 || n_factors < 1 || holdings_per_portfolio < 1 || months < 2) {
    fail("all counts must be at least 1 (months at least 2)");
  }
  if (!(noise >= 0.0)) fail("noise must be non-negative");
  if (!(overlap >= 0.0 && overlap <= 1.0)) fail("overlap must lie in [0, 1]");
  if (!(sector_tilt >= 0.0) || !(cross_loading >= 0.0)) fail("tilt and cross loading must be non-negative");
  if (n_factors + 1 > months) fail("need more months than factors");
  if (holdings_per_portfolio > n_constituents) fail("more holdings per portfolio than constituents");
}

nlohmann::json to_json(const SyntheticUniverseSpec& s) {
  return {{"n_portfolios", s.n_portfolios},
          {"n_constituents", s.n_constituents},
          {"n_factors", s.n_factors},
          {"holdings_per_portfolio", s.holdings_per_portfolio},
          {"overlap", s.overlap},
          {"sector_tilt", s.sector_tilt},
          {"cross_loading", s.cross_loading},
          {"noise", s.noise},
          {"months", s.months},
          {"first_period", format_period(s.first_period)},
          {"seed", s.seed}};
}

SyntheticUniverseSpec synthetic_spec_from_json(const nlohmann::json& j) {
  SyntheticUniverseSpec s;
  try {
    s.n_portfolios = j.value("n_portfolios", s.n_portfolios);
    s.n_constituents = j.value("n_constituents", s.n_constituents);
    s.n_factors = j.value("n_factors", s.n_factors);
    s.holdings_per_portfolio = j.value("holdings_per_portfolio", s.holdings_per_portfolio);
    s.overlap = j.value("overlap", s.overlap);
    s.sector_tilt = j.value("sector_tilt", s.sector_tilt);
    s.cross_loading = j.value("cross_loading", s.cross_loading);
    s.noise = j.value("noise", s.noise);
    s.months = j.value("months", s.months);
    if (j.contains("first_period")) s.first_period = parse_period(j.at("first_period").get<std::string>());
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("synthetic spec: ") + e.what());
  }
  s.validate();
  return s;
}

SyntheticUniverse generate_synthetic_universe(const SyntheticUniverseSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_constituents;
  const std::size_t f = spec.n_factors;
  const std::size_t t_len = spec.months;
  SyntheticUniverse out;

  // Constituents: sector, rating, bond terms, spreads, factor loadings.
  util::Rng bond_rng(util::derive_seed(spec.seed, 1));
  std::vector<double> sector_spread(f);
  for (auto& s : sector_spread) s = 40.0 + 80.0 * util::uniform01(bond_rng);
  std::vector<std::size_t> sector(n);
  std::vector<std::string> ids(n);
  std::vector<std::vector<double>> loading(n, std::vector<double>(f, 0.0));
  out.constituents.header = {"id", "sector", "rating", "maturity_days", "coupon",
                             "amount_issued", "age_days", "oas", "yield"};
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = numbered("B", i, n);
    sector[i] = util::uniform_index(bond_rng, f);
    const std::size_t rating = draw_rating(bond_rng);
    const double maturity = 365.0 + std::floor(util::uniform01(bond_rng) * 10585.0);
    const double age = std::floor(util::uniform01(bond_rng) * std::min(maturity, 3650.0));
    const double coupon =
        std::max(0.125, round_to(kRatings[rating].coupon + 0.6 * util::standard_normal(bond_rng), 0.125));
    const double amount = round_to(std::exp(6.0 + 0.5 * util::standard_normal(bond_rng)), 1.0);
    const double years = (maturity - age) / 365.0;
    const double oas = round_to(sector_spread[sector[i]] + kRatings[rating].spread + 6.0 * years +
                                    10.0 * util::standard_normal(bond_rng), 0.01);
    const double yield = round_to(2.0 + 0.35 * std::sqrt(years) + oas / 100.0 +
                                      0.05 * util::standard_normal(bond_rng), 0.0001);
    for (std::size_t k = 0; k < f; ++k) {
      loading[i][k] = k == sector[i] ? 1.0 : spec.cross_loading * util::standard_normal(bond_rng);
    }
    out.constituents.rows.push_back({ids[i], numbered("S", sector[i], f), kRatings[rating].name,
                                     util::format_double(maturity), util::format_double(coupon),
                                     util::format_double(amount), util::format_double(age),
                                     util::format_double(oas), util::format_double(yield)});
  }

  // Factor returns: orthogonal in-sample, about 2% monthly volatility.
  util::Rng factor_rng(util::derive_seed(spec.seed, 2));
  const Eigen::MatrixXd q = orthonormal_centered(t_len, f, factor_rng);
  const double scale = 0.02 * std::sqrt(static_cast<double>(t_len));
  std::vector<std::vector<double>> factor(f, std::vector<double>(t_len));
  for (std::size_t k = 0; k < f; ++k) {
    ReturnSeries series{numbered("F", k, f), {}, {}};
    for (std::size_t t = 0; t < t_len; ++t) {
      factor[k][t] = 0.004 + scale * q(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k));
      series.periods.push_back(spec.first_period + static_cast<Period>(t));
      series.returns.push_back(factor[k][t]);
    }
    out.factor_returns.push_back(std::move(series));
  }

  util::Rng idio_rng(util::derive_seed(spec.seed, 3));
  std::vector<std::vector<double>> bond_return(n, std::vector<double>(t_len));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < t_len; ++t) {
      double r = 0.0;
      for (std::size_t k = 0; k < f; ++k) r += loading[i][k] * factor[k][t];
      bond_return[i][t] = r + spec.noise * 0.01 * util::standard_normal(idio_rng);
    }
  }

  // Portfolios draw from a shared pool whose size shrinks as overlap grows.
  util::Rng pool_rng(util::derive_seed(spec.seed, 4));
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  util::shuffle(pool, pool_rng);
  const std::size_t m = spec.holdings_per_portfolio;
  const auto pool_size = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) - spec.overlap * static_cast<double>(n - m)));
  pool.resize(std::clamp(pool_size, m, n));

  for (std::size_t p = 0; p < spec.n_portfolios; ++p) {
    util::Rng rng(util::derive_seed(spec.seed, 1000 + p));
    std::vector<double> preference(f);
    for (auto& w : preference) w = std::exp(spec.sector_tilt * util::standard_normal(rng));
    // Weighted sampling without replacement: keep the m largest log(u) / w keys.
    std::vector<std::pair<double, std::size_t>> keys;
    keys.reserve(pool.size());
    for (std::size_t i : pool) {
      double u = util::uniform01(rng);
      while (u <= 0.0) u = util::uniform01(rng);
      keys.emplace_back(std::log(u) / preference[sector[i]], i);
    }
    std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(m), keys.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    std::vector<std::size_t> picks;
    for (std::size_t k = 0; k < m; ++k) picks.push_back(keys[k].second);
    std::sort(picks.begin(), picks.end());

    std::vector<std::pair<std::string, double>> entries;
    for (std::size_t i : picks) entries.emplace_back(ids[i], std::exp(0.75 * util::standard_normal(rng)));
    // Round-trip through the file format so in-memory and on-disk weights agree.
    WeightedSet raw = make_weighted_set(numbered("ETF", p + 1, spec.n_portfolios), std::move(entries), true);
    std::vector<std::pair<std::string, double>> rounded;
    for (std::size_t k = 0; k < raw.size(); ++k) {
      rounded.emplace_back(raw.id(k).str(), *util::parse_double(util::format_weight(raw.weight(k))));
    }
    WeightedSet set = make_weighted_set(raw.label(), std::move(rounded), false);

    ReturnSeries series{set.label(), {}, {}};
    for (std::size_t t = 0; t < t_len; ++t) {
      double r = 0.0;
      for (std::size_t k = 0; k < set.size(); ++k) r += set.weight(k) * bond_return[picks[k]][t];
      series.periods.push_back(spec.first_period + static_cast<Period>(t));
      series.returns.push_back(r);
    }
    out.portfolio_returns.push_back(std::move(series));
    out.holdings.push_back(std::move(set));
  }
  return out;
}

PlantedUniverse generate_planted_universe(std::size_t n, std::size_t months, std::uint64_t seed) {
  if (n < 4 || n + 1 > months) {
    throw Error(ErrorCode::InvalidArgument, "planted universe needs 4 <= portfolios < months");
  }
  util::Rng rng(util::derive_seed(seed, 7));
  std::vector<double> position(n);
  for (auto& x : position) x = 3.0 * util::uniform01(rng);

  Eigen::MatrixXd c(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<double> values(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const double v = a == b ? 1.0 : std::exp(-std::abs(position[a] - position[b]));
      c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
      values[a * n + b] = v;
    }
  }
  // With Q orthonormal and centered, Q L^T has sample covariance L L^T = C.
  const Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::Internal, "planted correlation is not positive definite");
  const Eigen::MatrixXd q = orthonormal_centered(months, n, rng);
  const Eigen::MatrixXd r = q * llt.matrixL().transpose();

  PlantedUniverse out;
  std::vector<std::string> ids;
  const Period start = 2022 * 12 + 1;
  for (std::size_t a = 0; a < n; ++a) {
    ids.push_back(numbered("C", a + 1, n));
    out.holdings.push_back(make_weighted_set(numbered("P", a + 1, n), {{ids.back(), 1.0}}, false));
    ReturnSeries series{out.holdings.back().label(), {}, {}};
    for (std::size_t t = 0; t < months; ++t) {
      series.periods.push_back(start + static_cast<Period>(t));
      series.returns.push_back(0.005 + 0.03 * r(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(a)));
    }
    out.returns.push_back(std::move(series));
  }
  out.similarity = SimilarityMatrix::square(std::move(ids), std::move(values));
  return out;
}

}  // namespace strapsim::ingest
