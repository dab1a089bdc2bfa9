#pragma once

// Successive-shortest-path min-cost flow with Johnson potentials.
// Bellman-Ford seeds the potentials (negative arc costs are allowed, negative
// cycles are not); every later search is Dijkstra on reduced costs.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hetnet {

template <typename Cost>
class MinCostFlow {
 public:
  struct Result {
    int flow = 0;
    Cost cost = Cost{};
  };

  explicit MinCostFlow(std::size_t nodes) : adj_(nodes) {}

  std::size_t num_nodes() const { return adj_.size(); }

  /// Returns an edge handle usable with flow().
  std::size_t add_edge(std::size_t from, std::size_t to, int capacity, Cost cost) {
    if (from >= adj_.size() || to >= adj_.size()) throw std::out_of_range("MinCostFlow: node out of range");
    if (capacity < 0) throw std::invalid_argument("MinCostFlow: negative capacity");
    const std::size_t id = edges_.size();
    edges_.push_back({from, to, capacity, cost});
    edges_.push_back({to, from, 0, -cost});
    adj_[from].push_back(id);
    adj_[to].push_back(id + 1);
    return id;
  }

  int flow(std::size_t edge) const { return edges_[edge ^ 1].cap; }

  /// Pushes flow from source to sink along successive cheapest paths until
  /// `flow_limit` units are sent or no path remains. With `negative_paths_only`
  /// augmentation stops at the first path whose cost is >= 0, which yields the
  /// minimum-cost flow over all flow values.
  Result solve(std::size_t source, std::size_t sink, int flow_limit, bool negative_paths_only) {
    Result result;
    init_potentials(source);
    const std::size_t n = adj_.size();
    std::vector<Cost> dist(n);
    std::vector<std::size_t> via(n);
    std::vector<unsigned char> reached(n);

    while (result.flow < flow_limit) {
      dijkstra(source, dist, via, reached);
      if (!reached[sink]) break;
      for (std::size_t v = 0; v < n; ++v)
        if (reached[v]) potential_[v] += dist[v];
      const Cost path_cost = potential_[sink] - potential_[source];
      if (negative_paths_only && !(path_cost < Cost{})) break;

      int push = flow_limit - result.flow;
      for (std::size_t v = sink; v != source; v = edges_[via[v]].from) push = std::min(push, edges_[via[v]].cap);
      for (std::size_t v = sink; v != source; v = edges_[via[v]].from) {
        edges_[via[v]].cap -= push;
        edges_[via[v] ^ 1].cap += push;
      }
      result.flow += push;
      result.cost += path_cost * static_cast<Cost>(push);
    }
    return result;
  }

 private:
  struct Edge {
    std::size_t from;
    std::size_t to;
    int cap;
    Cost cost;
  };

  static constexpr Cost kInf = std::numeric_limits<Cost>::max();

  void init_potentials(std::size_t source) {
    const std::size_t n = adj_.size();
    potential_.assign(n, kInf);
    potential_[source] = Cost{};
    for (std::size_t round = 0; round + 1 < n; ++round) {
      bool changed = false;
      for (const Edge& e : edges_) {
        if (e.cap <= 0 || potential_[e.from] == kInf) continue;
        if (potential_[e.from] + e.cost < potential_[e.to]) {
          potential_[e.to] = potential_[e.from] + e.cost;
          changed = true;
        }
      }
      if (!changed) break;
    }
    // Unreachable nodes stay unreachable for the whole run: flow only ever
    // opens reverse arcs along paths from the source.
    for (Cost& p : potential_)
      if (p == kInf) p = Cost{};
  }

  void dijkstra(std::size_t source, std::vector<Cost>& dist, std::vector<std::size_t>& via,
                std::vector<unsigned char>& reached) {
    using Item = std::pair<Cost, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(reached.begin(), reached.end(), 0);
    dist[source] = Cost{};
    heap.push({Cost{}, source});
    while (!heap.empty()) {
      auto [d, v] = heap.top();
      heap.pop();
      if (reached[v]) continue;
      reached[v] = 1;
      for (std::size_t id : adj_[v]) {
        const Edge& e = edges_[id];
        if (e.cap <= 0 || reached[e.to]) continue;
        // Reduced costs are >= 0 up to rounding; clamp so Dijkstra stays valid.
        Cost reduced = e.cost + potential_[v] - potential_[e.to];
        if (reduced < Cost{}) reduced = Cost{};
        if (d + reduced < dist[e.to]) {
          dist[e.to] = d + reduced;
          via[e.to] = id;
          heap.push({dist[e.to], e.to});
        }
      }
    }
  }

  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<Cost> potential_;
};

}  // namespace hetnet
