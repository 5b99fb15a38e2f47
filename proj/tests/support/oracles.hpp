#pragma once

// Test-only reference computations. Deliberately naive and independent of the
// library code paths they check.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Maximum of sum(mass * S) over greedy fills in every ordering of the cells.
// Every vertex of the capacity polytope is reached by filling its support
// cells in some order, and trailing cells only add non-negative terms, so the
// maximum over all orderings is the transport optimum. Use on <= 7 cells.
inline double brute_force_transport(const std::vector<double>& wx, const std::vector<double>& wy,
                                    const std::vector<double>& s) {
  const std::size_t m = wx.size();
  const std::size_t n = wy.size();
  std::vector<std::size_t> cells(m * n);
  std::iota(cells.begin(), cells.end(), std::size_t{0});
  double best = 0.0;
  do {
    std::vector<double> rx = wx;
    std::vector<double> ry = wy;
    double total = 0.0;
    for (std::size_t c : cells) {
      const std::size_t i = c / n;
      const std::size_t j = c % n;
      const double mass = std::min(rx[i], ry[j]);
      total += mass * s[c];
      rx[i] -= mass;
      ry[j] -= mass;
    }
    best = std::max(best, total);
  } while (std::next_permutation(cells.begin(), cells.end()));
  return best;
}

// Spearman for tie-free data by the squared rank difference formula.
inline double spearman_no_ties(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(n);
    for (std::size_t k = 0; k < n; ++k) r[order[k]] = static_cast<double>(k + 1);
    return r;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  const double nn = static_cast<double>(n);
  return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
}

inline std::vector<double> random_weights(std::mt19937_64& rng, std::size_t n, bool normalize) {
  std::uniform_real_distribution<double> dist(0.01, 1.0);
  std::vector<double> w(n);
  double total = 0.0;
  for (double& x : w) total += (x = dist(rng));
  if (normalize)
    for (double& x : w) x /= total;
  return w;
}

}  // namespace oracle
