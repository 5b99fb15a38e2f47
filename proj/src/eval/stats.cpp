#include "strapsim/eval/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include "strapsim/error.hpp"

namespace strapsim::eval {
namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorCode::LengthMismatch,
                "inputs have " + std::to_string(a) + " and " + std::to_string(b) + " entries");
  }
  if (a == 0) throw Error(ErrorCode::TooShort, "inputs are empty");
}

bool is_constant(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

// NaN when either side is constant. The centered sums of a constant series
// are rounding noise rather than zero, so constancy is checked directly.
double centered_correlation(std::span<const double> a, std::span<const double> b) {
  if (is_constant(a) || is_constant(b)) return NAN;
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return NAN;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace

ClassificationScores classification_scores(std::span<const std::string> pred,
                                           std::span<const std::string> truth) {
  check_lengths(pred.size(), truth.size());
  std::set<std::string> classes(truth.begin(), truth.end());
  classes.insert(pred.begin(), pred.end());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == truth[i];

  double f1_total = 0.0;
  for (const auto& c : classes) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const bool p = pred[i] == c;
      const bool t = truth[i] == c;
      tp += p && t;
      fp += p && !t;
      fn += !p && t;
    }
    const std::size_t denom = 2 * tp + fp + fn;
    f1_total += denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
  return {static_cast<double>(correct) / static_cast<double>(pred.size()),
          f1_total / static_cast<double>(classes.size())};
}

RegressionScores regression_scores(std::span<const double> pred, std::span<const double> truth,
                                   bool with_mape) {
  check_lengths(pred.size(), truth.size());
  double sq = 0.0, abs_sum = 0.0, pct = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - truth[i];
    sq += e * e;
    abs_sum += std::abs(e);
    if (with_mape) {
      if (truth[i] == 0.0) {
        throw Error(ErrorCode::ZeroTruthForMape, "truth value " + std::to_string(i) + " is zero");
      }
      pct += std::abs(e / truth[i]);
    }
  }
  const double n = static_cast<double>(pred.size());
  RegressionScores out{std::sqrt(sq / n), abs_sum / n, std::nullopt};
  if (with_mape) out.mape = 100.0 * pct / n;
  return out;
}

std::map<std::string, double> error_metrics(std::span<const std::string> pred,
                                            std::span<const std::string> truth) {
  const auto s = classification_scores(pred, truth);
  return {{"accuracy", s.accuracy}, {"f1", s.macro_f1}};
}

std::map<std::string, double> error_metrics(std::span<const double> pred, std::span<const double> truth) {
  const auto s = regression_scores(pred, truth, true);
  return {{"rmse", s.rmse}, {"mae", s.mae}, {"mape", *s.mape}};
}

std::vector<double> fractional_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  check_lengths(a.size(), b.size());
  return centered_correlation(a, b);
}

SpearmanResult spearman(std::span<const double> a, std::span<const double> b,
                        const SpearmanOptions& options) {
  check_lengths(a.size(), b.size());
  const std::size_t n = a.size();
  if (n < 3) throw Error(ErrorCode::TooShort, "spearman needs at least 3 pairs, got " + std::to_string(n));
  const auto ra = fractional_ranks(a);
  const auto rb = fractional_ranks(b);
  const double rho = centered_correlation(ra, rb);
  if (std::isnan(rho)) throw Error(ErrorCode::ConstantInput, "an input has no rank variance");

  SpearmanResult out{rho, 1.0};
  if (options.exact_permutation && n <= 10) {
    std::vector<double> perm = rb;
    std::sort(perm.begin(), perm.end());
    std::size_t extreme = 0, total = 0;
    do {
      const double r = centered_correlation(ra, perm);
      if (std::abs(r) >= std::abs(rho) - 1e-12) ++extreme;
      ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.p_value = static_cast<double>(extreme) / static_cast<double>(total);
    return out;
  }
  if (std::abs(rho) >= 1.0) {
    out.p_value = 0.0;
    return out;
  }
  const double dof = static_cast<double>(n - 2);
  const double t = rho * std::sqrt(dof / (1.0 - rho * rho));
  const boost::math::students_t dist(dof);
  out.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
  return out;
}

std::optional<double> return_correlation(const ingest::ReturnSeries& a, const ingest::ReturnSeries& b,
                                         std::size_t min_overlap) {
  std::vector<double> xa, xb;
  std::size_t i = 0, j = 0;
  while (i < a.periods.size() && j < b.periods.size()) {
    if (a.periods[i] < b.periods[j]) {
      ++i;
    } else if (b.periods[j] < a.periods[i]) {
      ++j;
    } else {
      xa.push_back(a.returns[i++]);
      xb.push_back(b.returns[j++]);
    }
  }
  if (xa.size() < min_overlap || xa.size() < 2) return std::nullopt;
  const double r = centered_correlation(xa, xb);
  if (std::isnan(r)) return std::nullopt;
  return r;
}

}  // namespace strapsim::eval
