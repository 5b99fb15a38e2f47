#include <vector>

#include "strapsim/error.hpp"
#include "strapsim/metrics.hpp"
#include "strapsim/simd/kernels.hpp"
#include "strapsim/util/parallel.hpp"

namespace strapsim::metrics {

PairScorer::PairScorer(std::span<const WeightedSet> sets, const SimilarityMatrix* s,
                       Metric metric, StrapsimOptions options)
    : sets_(sets), matrix_(s), metric_(metric), options_(options) {
  if (!needs_similarity(metric)) return;
  if (s == nullptr) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(name(metric)) + " needs a constituent similarity matrix");
  }
  // Rows resolve x-side ids, columns y-side ids; self-mode matrices share both.
  row_index_.resize(sets.size());
  col_index_.resize(sets.size());
  for (std::size_t k = 0; k < sets.size(); ++k) {
    const WeightedSet& set = sets[k];
    row_index_[k].reserve(set.size());
    col_index_[k].reserve(set.size());
    for (const auto& id : set.ids()) {
      auto r = s->find_row(id.str());
      auto c = s->find_col(id.str());
      if (!r || !c) {
        throw Error(ErrorCode::UnknownConstituent,
                    id.str() + " (set '" + set.label() + "')");
      }
      row_index_[k].push_back(static_cast<std::uint32_t>(*r));
      col_index_[k].push_back(static_cast<std::uint32_t>(*c));
    }
  }
}

MetricResult PairScorer::score(std::size_t a, std::size_t b) const {
  const WeightedSet& x = sets_[a];
  const WeightedSet& y = sets_[b];
  switch (metric_) {
    case Metric::Jaccard:
      return jaccard(x, y);
    case Metric::WeightedJaccard:
      return weighted_jaccard(x, y);
    case Metric::BertScore:
    case Metric::Strapsim:
      break;
  }

  thread_local std::vector<double> block;
  const auto& rows = row_index_[a];
  const auto& cols = col_index_[b];
  block.resize(rows.size() * cols.size());
  const auto& k = simd::kernels();
  const std::size_t stride = matrix_->cols();
  const double* base = matrix_->values().data();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    k.gather(base + static_cast<std::size_t>(rows[i]) * stride, cols.data(), cols.size(),
             block.data() + i * cols.size());
  }
  const MatrixView view{block.data(), rows.size(), cols.size()};
  if (metric_ == Metric::BertScore) return bertscore_like(x.weights(), y.weights(), view);
  return strapsim_score(x.weights(), y.weights(), view, options_);
}

PairwiseMatrix pairwise_matrix(std::span<const WeightedSet> sets, const SimilarityMatrix* s,
                               Metric metric, const StrapsimOptions& options,
                               std::size_t threads) {
  const PairScorer scorer(sets, s, metric, options);
  const std::size_t n = sets.size();

  PairwiseMatrix out;
  out.labels.reserve(n);
  for (const auto& set : sets) out.labels.push_back(set.label());
  out.cells.resize(n * n);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n + 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) pairs.emplace_back(i, j);

  util::parallel_for(pairs.size(), threads, [&](std::size_t p) {
    const auto [i, j] = pairs[p];
    try {
      out.cells[i * n + j] = scorer.score(i, j);
    } catch (const Error& e) {
      throw Error(e.code(), "pair (" + sets[i].label() + ", " + sets[j].label() + "): " + e.what());
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) out.cells[i * n + j] = out.cells[j * n + i];
  return out;
}

}  // namespace strapsim::metrics
