#include <algorithm>
#include <cstdint>
#include <vector>

#include "strapsim/error.hpp"
#include "strapsim/metrics.hpp"

namespace strapsim::metrics {
namespace {

struct Candidate {
  double score;
  std::uint64_t cell;  // row << 32 | col, so ascending cell means ascending (row, col)
};

bool before(const Candidate& a, const Candidate& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  return a.cell < b.cell;
}

void check_shape(std::span<const double> wx, std::span<const double> wy, MatrixView s) {
  if (s.rows != wx.size() || s.cols != wy.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "similarity block is " + std::to_string(s.rows) + "x" + std::to_string(s.cols) +
                    " but sets have " + std::to_string(wx.size()) + " and " +
                    std::to_string(wy.size()) + " entries");
  }
}

struct GreedyState {
  std::vector<double> rx;
  std::vector<double> ry;
  std::size_t alive_x = 0;
  std::size_t alive_y = 0;
  double score = 0.0;

  void reset(std::span<const double> wx, std::span<const double> wy) {
    rx.assign(wx.begin(), wx.end());
    ry.assign(wy.begin(), wy.end());
    alive_x = static_cast<std::size_t>(
        std::count_if(rx.begin(), rx.end(), [](double w) { return w > kMassEpsilon; }));
    alive_y = static_cast<std::size_t>(
        std::count_if(ry.begin(), ry.end(), [](double w) { return w > kMassEpsilon; }));
    score = 0.0;
  }

  bool done() const noexcept { return alive_x == 0 || alive_y == 0; }

  // Moves mass across (i, j) when both ends are alive; returns the mass moved.
  double transfer(std::size_t i, std::size_t j, double s) noexcept {
    if (rx[i] <= kMassEpsilon || ry[j] <= kMassEpsilon) return 0.0;
    const double mass = std::min(rx[i], ry[j]);
    score += mass * s;
    rx[i] -= mass;
    ry[j] -= mass;
    if (rx[i] <= kMassEpsilon) --alive_x;
    if (ry[j] <= kMassEpsilon) --alive_y;
    return mass;
  }

  double residual() const noexcept {
    double total = 0.0;
    for (double w : rx) total += w;
    for (double w : ry) total += w;
    return total;
  }
};

// Eligible pairs (positive score, at least min_sim) in visiting order.
void collect(MatrixView s, double min_sim, std::vector<Candidate>& out) {
  out.clear();
  out.reserve(s.rows * s.cols);
  for (std::size_t i = 0; i < s.rows; ++i) {
    const double* row = s.data + i * s.cols;
    for (std::size_t j = 0; j < s.cols; ++j) {
      const double v = row[j];
      if (!(v > 0.0) || v < min_sim) continue;
      out.push_back({v, (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j)});
    }
  }
  std::sort(out.begin(), out.end(), before);
}

// std heaps put the largest element first, so invert the visiting order.
bool heap_less(const Candidate& a, const Candidate& b) noexcept { return before(b, a); }

std::size_t row_of(const Candidate& c) noexcept { return static_cast<std::size_t>(c.cell >> 32); }
std::size_t col_of(const Candidate& c) noexcept {
  return static_cast<std::size_t>(c.cell & 0xffffffffULL);
}

}  // namespace

MatchTrace strapsim(std::span<const double> wx, std::span<const double> wy, MatrixView s,
                    const StrapsimOptions& options) {
  check_shape(wx, wy, s);
  std::vector<Candidate> order;
  collect(s, options.min_match_sim, order);

  GreedyState state;
  state.reset(wx, wy);
  MatchTrace trace;
  for (const Candidate& c : order) {
    if (state.done()) break;
    const std::size_t i = row_of(c);
    const std::size_t j = col_of(c);
    const double before_score = state.score;
    const double mass = state.transfer(i, j, c.score);
    if (mass > 0.0) {
      trace.steps.push_back({i, j, c.score, mass, state.score - before_score});
    }
  }
  trace.total_score = state.score;
  trace.total_residual = state.residual();
  trace.residual_x = std::move(state.rx);
  trace.residual_y = std::move(state.ry);
  return trace;
}

MatchTrace strapsim(const WeightedSet& x, const WeightedSet& y, const SimilarityMatrix& s,
                    const StrapsimOptions& options) {
  return strapsim(x.weights(), y.weights(), MatrixView::of(s), options);
}

MetricResult strapsim_score(std::span<const double> wx, std::span<const double> wy,
                            MatrixView s, const StrapsimOptions& options) {
  check_shape(wx, wy, s);
  // Lazy k-way merge of per-row candidate heaps. The row heads are merged in
  // the same (score, row, col) order as the full sort, but rows leave as soon
  // as their mass is gone and dead columns are skipped at the head, so most
  // of the block is never ordered.
  thread_local std::vector<std::uint32_t> cols;
  thread_local std::vector<std::size_t> begin;
  thread_local std::vector<std::size_t> end;
  thread_local std::vector<Candidate> heads;
  thread_local GreedyState state;

  state.reset(wx, wy);
  cols.clear();
  begin.assign(s.rows, 0);
  end.assign(s.rows, 0);
  heads.clear();

  auto row_order = [&](std::size_t i) {
    const double* row = s.data + i * s.cols;
    // Max-heap on (score desc, col asc): "less" means visited later.
    return [row](std::uint32_t a, std::uint32_t b) {
      return row[a] != row[b] ? row[a] < row[b] : a > b;
    };
  };
  // Drops dead columns from row i's heap; false once the row has no live candidate.
  auto settle = [&](std::size_t i) {
    const auto cmp = row_order(i);
    auto first = cols.begin() + static_cast<std::ptrdiff_t>(begin[i]);
    while (end[i] > begin[i] && state.ry[cols[begin[i]]] <= kMassEpsilon) {
      std::pop_heap(first, cols.begin() + static_cast<std::ptrdiff_t>(end[i]), cmp);
      --end[i];
    }
    return end[i] > begin[i];
  };
  auto head_of = [&](std::size_t i) {
    const std::uint32_t j = cols[begin[i]];
    return Candidate{s(i, j), (static_cast<std::uint64_t>(i) << 32) | j};
  };

  for (std::size_t i = 0; i < s.rows; ++i) {
    begin[i] = cols.size();
    if (state.rx[i] > kMassEpsilon) {
      const double* row = s.data + i * s.cols;
      for (std::size_t j = 0; j < s.cols; ++j) {
        const double v = row[j];
        if (v > 0.0 && v >= options.min_match_sim) cols.push_back(static_cast<std::uint32_t>(j));
      }
    }
    end[i] = cols.size();
    std::make_heap(cols.begin() + static_cast<std::ptrdiff_t>(begin[i]), cols.end(), row_order(i));
    if (settle(i)) heads.push_back(head_of(i));
  }
  std::make_heap(heads.begin(), heads.end(), heap_less);

  while (!heads.empty() && !state.done()) {
    std::pop_heap(heads.begin(), heads.end(), heap_less);
    const Candidate top = heads.back();
    heads.pop_back();
    const std::size_t i = row_of(top);
    // The head may have gone stale since it was pushed; re-queue the fresh one.
    if (!settle(i)) continue;
    const Candidate fresh = head_of(i);
    if (fresh.cell != top.cell) {
      heads.push_back(fresh);
      std::push_heap(heads.begin(), heads.end(), heap_less);
      continue;
    }
    state.transfer(i, col_of(top), top.score);
    if (state.rx[i] <= kMassEpsilon) continue;
    // The column is exhausted now; move on to the row's next candidate.
    if (settle(i)) {
      heads.push_back(head_of(i));
      std::push_heap(heads.begin(), heads.end(), heap_less);
    }
  }
  return {state.score, state.residual(), std::nullopt};
}

MetricResult strapsim_identity_reduction(const WeightedSet& x, const WeightedSet& y) {
  double shared = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (auto j = y.find(x.id(i))) shared += std::min(x.weight(i), y.weight(*j));
  }
  const double residual = (x.total_weight() - shared) + (y.total_weight() - shared);
  return {shared, std::max(0.0, residual), std::nullopt};
}

}  // namespace strapsim::metrics
