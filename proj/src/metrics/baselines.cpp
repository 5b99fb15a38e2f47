#include <algorithm>
#include <vector>

#include "strapsim/error.hpp"
#include "strapsim/metrics.hpp"
#include "strapsim/simd/kernels.hpp"

namespace strapsim::metrics {

std::string_view name(Metric metric) noexcept {
  switch (metric) {
    case Metric::Jaccard: return "jaccard";
    case Metric::WeightedJaccard: return "weighted-jaccard";
    case Metric::BertScore: return "bertscore";
    case Metric::Strapsim: return "strapsim";
  }
  return "unknown";
}

Metric parse_metric(std::string_view text) {
  for (Metric m : kAllMetrics) {
    if (name(m) == text) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown metric '" + std::string(text) + "'");
}

bool needs_similarity(Metric metric) noexcept {
  return metric == Metric::BertScore || metric == Metric::Strapsim;
}

MetricResult jaccard(const WeightedSet& x, const WeightedSet& y) {
  std::size_t shared = 0;
  for (const auto& id : x.ids()) {
    if (y.find(id)) ++shared;
  }
  const std::size_t united = x.size() + y.size() - shared;
  const double score = united == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(united);
  return {score, 1.0 - score, std::nullopt};
}

MetricResult weighted_jaccard(const WeightedSet& x, const WeightedSet& y) {
  thread_local std::vector<double> aligned;
  aligned.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) aligned[i] = y.weight_of(x.id(i));

  double min_sum = 0.0;
  double max_sum = 0.0;
  simd::kernels().min_max_sum(x.weights().data(), aligned.data(), x.size(), &min_sum, &max_sum);
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (!x.find(y.id(j))) max_sum += y.weight(j);
  }
  if (!(max_sum > 0.0)) {
    throw Error(ErrorCode::DegenerateUnion,
                "union of '" + x.label() + "' and '" + y.label() + "' carries no weight");
  }
  const double score = min_sum / max_sum;
  return {score, 1.0 - score, std::nullopt};
}

namespace {

double harmonic(double a, double b) noexcept {
  const double sum = a + b;
  return sum > 0.0 ? 2.0 * a * b / sum : 0.0;
}

}  // namespace

MetricResult bertscore_like(std::span<const double> wx, std::span<const double> wy, MatrixView s) {
  if (s.rows != wx.size() || s.cols != wy.size()) {
    throw Error(ErrorCode::DimensionMismatch, "similarity block does not match set sizes");
  }
  const auto& k = simd::kernels();
  thread_local std::vector<double> remaining_x;
  thread_local std::vector<double> remaining_y;
  thread_local std::vector<double> column;
  remaining_x.assign(wx.begin(), wx.end());
  remaining_y.assign(wy.begin(), wy.end());

  double recall_num = 0.0;
  double recall_den = 0.0;
  for (std::size_t i = 0; i < s.rows; ++i) {
    const std::size_t j = k.argmax(s.data + i * s.cols, s.cols);
    const double w = std::min(wx[i], wy[j]);
    recall_num += w * s(i, j);
    recall_den += w;
    remaining_x[i] -= w;
    remaining_y[j] -= w;
  }

  double precision_num = 0.0;
  double precision_den = 0.0;
  column.resize(s.rows);
  for (std::size_t j = 0; j < s.cols; ++j) {
    for (std::size_t i = 0; i < s.rows; ++i) column[i] = s(i, j);
    const std::size_t i = k.argmax(column.data(), s.rows);
    const double w = std::min(wy[j], wx[i]);
    precision_num += w * s(i, j);
    precision_den += w;
    remaining_y[j] -= w;
    remaining_x[i] -= w;
  }

  BertComponents out;
  out.recall = recall_den > 0.0 ? recall_num / recall_den : 0.0;
  out.precision = precision_den > 0.0 ? precision_num / precision_den : 0.0;
  out.f1 = harmonic(out.recall, out.precision);

  double left_x = 0.0;
  double left_y = 0.0;
  for (double r : remaining_x) left_x += std::max(0.0, r);
  for (double r : remaining_y) left_y += std::max(0.0, r);
  out.residual_recall = 1.0 - left_x;
  out.residual_precision = 1.0 - left_y;
  out.residual_f1 = harmonic(out.residual_recall, out.residual_precision);

  return {out.f1, out.residual_f1, out};
}

MetricResult bertscore_like(const WeightedSet& x, const WeightedSet& y, const SimilarityMatrix& s) {
  return bertscore_like(x.weights(), y.weights(), MatrixView::of(s));
}

MetricResult evaluate(Metric metric, const WeightedSet& x, const WeightedSet& y,
                      const SimilarityMatrix* s, const StrapsimOptions& options) {
  switch (metric) {
    case Metric::Jaccard:
      return jaccard(x, y);
    case Metric::WeightedJaccard:
      return weighted_jaccard(x, y);
    case Metric::BertScore:
    case Metric::Strapsim: {
      if (s == nullptr) {
        throw Error(ErrorCode::InvalidArgument,
                    std::string(name(metric)) + " needs a constituent similarity matrix");
      }
      const SimilarityMatrix aligned = align_matrix(*s, x, y);
      if (metric == Metric::BertScore) return bertscore_like(x, y, aligned);
      return strapsim_score(x.weights(), y.weights(), MatrixView::of(aligned), options);
    }
  }
  throw Error(ErrorCode::Internal, "unhandled metric");
}

}  // namespace strapsim::metrics
