#include <algorithm>
#include <limits>
#include <vector>

#include "strapsim/error.hpp"
#include "strapsim/metrics.hpp"

namespace strapsim::metrics {
namespace {

// Min-cost flow by successive shortest paths (Bellman-Ford, since arc costs
// are negated similarities). Augmentation stops once the cheapest
// source-sink path no longer has negative cost, which yields the
// profit-maximizing flow of unconstrained value.
class FlowNetwork {
 public:
  explicit FlowNetwork(std::size_t nodes) : adjacency_(nodes) {}

  std::size_t add_arc(std::size_t from, std::size_t to, double capacity, double cost) {
    adjacency_[from].push_back(arcs_.size());
    arcs_.push_back({to, capacity, cost});
    adjacency_[to].push_back(arcs_.size());
    arcs_.push_back({from, 0.0, -cost});
    return arcs_.size() - 2;
  }

  void run(std::size_t source, std::size_t sink) {
    const std::size_t n = adjacency_.size();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    constexpr double kCapacityEps = 1e-15;
    std::vector<double> dist(n);
    std::vector<std::size_t> via(n);

    for (;;) {
      std::fill(dist.begin(), dist.end(), kInf);
      std::fill(via.begin(), via.end(), arcs_.size());
      dist[source] = 0.0;
      for (std::size_t round = 0; round + 1 < n; ++round) {
        bool changed = false;
        for (std::size_t u = 0; u < n; ++u) {
          if (dist[u] == kInf) continue;
          for (std::size_t a : adjacency_[u]) {
            const Arc& arc = arcs_[a];
            if (arc.capacity <= kCapacityEps) continue;
            const double candidate = dist[u] + arc.cost;
            if (candidate < dist[arc.to] - 1e-15) {
              dist[arc.to] = candidate;
              via[arc.to] = a;
              changed = true;
            }
          }
        }
        if (!changed) break;
      }
      if (dist[sink] == kInf || dist[sink] >= -1e-15) return;

      double bottleneck = kInf;
      for (std::size_t v = sink; v != source;) {
        const std::size_t a = via[v];
        bottleneck = std::min(bottleneck, arcs_[a].capacity);
        v = arcs_[a ^ 1].to;
      }
      for (std::size_t v = sink; v != source;) {
        const std::size_t a = via[v];
        arcs_[a].capacity -= bottleneck;
        arcs_[a ^ 1].capacity += bottleneck;
        v = arcs_[a ^ 1].to;
      }
    }
  }

  // Flow on a forward arc equals the capacity accumulated on its reverse.
  double flow(std::size_t arc) const { return arcs_[arc ^ 1].capacity; }

 private:
  struct Arc {
    std::size_t to;
    double capacity;
    double cost;
  };
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<Arc> arcs_;
};

}  // namespace

TransportPlan exact_transport_oracle(std::span<const double> wx, std::span<const double> wy,
                                     MatrixView s) {
  if (s.rows != wx.size() || s.cols != wy.size()) {
    throw Error(ErrorCode::DimensionMismatch, "similarity block does not match set sizes");
  }
  if (s.rows * s.cols > kOracleMaxCells) {
    throw Error(ErrorCode::TooLarge, std::to_string(s.rows * s.cols) + " cells exceed the oracle cap of " +
                                         std::to_string(kOracleMaxCells));
  }

  const std::size_t source = 0;
  const std::size_t sink = 1;
  auto row_node = [](std::size_t i) { return 2 + i; };
  auto col_node = [&](std::size_t j) { return 2 + s.rows + j; };

  FlowNetwork net(2 + s.rows + s.cols);
  for (std::size_t i = 0; i < s.rows; ++i) net.add_arc(source, row_node(i), wx[i], 0.0);
  for (std::size_t j = 0; j < s.cols; ++j) net.add_arc(col_node(j), sink, wy[j], 0.0);

  const double unbounded = std::max(1.0, [&] {
    double total = 0.0;
    for (double w : wx) total += w;
    return total;
  }());
  std::vector<std::size_t> cell_arc(s.rows * s.cols, 0);
  for (std::size_t i = 0; i < s.rows; ++i) {
    for (std::size_t j = 0; j < s.cols; ++j) {
      if (s(i, j) > 0.0) cell_arc[i * s.cols + j] = net.add_arc(row_node(i), col_node(j), unbounded, -s(i, j)) + 1;
    }
  }
  net.run(source, sink);

  TransportPlan plan;
  for (std::size_t i = 0; i < s.rows; ++i) {
    for (std::size_t j = 0; j < s.cols; ++j) {
      const std::size_t tagged = cell_arc[i * s.cols + j];
      if (tagged == 0) continue;
      const double mass = net.flow(tagged - 1);
      if (mass > 1e-15) {
        plan.assignments.push_back({i, j, mass});
        plan.objective += mass * s(i, j);
      }
    }
  }
  return plan;
}

TransportPlan exact_transport_oracle(const WeightedSet& x, const WeightedSet& y,
                                     const SimilarityMatrix& s) {
  return exact_transport_oracle(x.weights(), y.weights(), MatrixView::of(s));
}

}  // namespace strapsim::metrics
