#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "orh/rng.hpp"
#include "orh/road_network.hpp"

namespace fixtures {

// Connected random graph: a random spanning tree plus `extra_edges` random
// chords, weights uniform in [1, max_weight].
inline orh::RoadGraph random_connected_graph(std::uint32_t nodes, std::uint32_t extra_edges,
                                             std::int64_t max_weight, orh::Rng& rng) {
  std::vector<orh::GraphEdge> edges;
  for (std::uint32_t v = 1; v < nodes; ++v) {
    const auto parent = static_cast<orh::NodeId>(rng.uniform(v));
    edges.push_back({parent, v, static_cast<std::int64_t>(1 + rng.uniform(max_weight))});
  }
  std::uint32_t added = 0;
  while (added < extra_edges) {
    const auto a = static_cast<orh::NodeId>(rng.uniform(nodes));
    const auto b = static_cast<orh::NodeId>(rng.uniform(nodes));
    if (a == b) continue;
    edges.push_back({a, b, static_cast<std::int64_t>(1 + rng.uniform(max_weight))});
    ++added;
  }
  return orh::RoadGraph(nodes, edges);
}

// Independent oracle for unit-weight graphs: plain breadth-first search over
// an edge list, no shared code with the library's Dijkstra.
class BfsOracle {
 public:
  BfsOracle(std::uint32_t nodes, const std::vector<orh::GraphEdge>& edges) : adj_(nodes) {
    for (const auto& e : edges) {
      adj_[e.a].push_back(e.b);
      adj_[e.b].push_back(e.a);
    }
  }

  static BfsOracle grid(std::uint32_t width, std::uint32_t height) {
    std::vector<orh::GraphEdge> edges;
    for (std::uint32_t row = 0; row < height; ++row) {
      for (std::uint32_t col = 0; col < width; ++col) {
        const orh::NodeId id = row * width + col;
        if (col + 1 < width) edges.push_back({id, id + 1, 1});
        if (row + 1 < height) edges.push_back({id, id + width, 1});
      }
    }
    return BfsOracle(width * height, edges);
  }

  std::vector<std::uint64_t> distances_from(orh::NodeId source) const {
    std::vector<std::uint64_t> dist(adj_.size(), ~std::uint64_t{0});
    std::deque<orh::NodeId> queue{source};
    dist[source] = 0;
    while (!queue.empty()) {
      const orh::NodeId v = queue.front();
      queue.pop_front();
      for (const orh::NodeId to : adj_[v]) {
        if (dist[to] == ~std::uint64_t{0}) {
          dist[to] = dist[v] + 1;
          queue.push_back(to);
        }
      }
    }
    return dist;
  }

 private:
  std::vector<std::vector<orh::NodeId>> adj_;
};

}  // namespace fixtures
