#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "orh/rng.hpp"

namespace orh {

using NodeId = std::uint32_t;
using Dist = std::uint64_t;

inline constexpr Dist kInfiniteDist = ~Dist{0};

struct GraphEdge {
  NodeId a = 0;
  NodeId b = 0;
  std::int64_t weight = 0;  // validated non-negative at graph construction
};

// Weighted undirected road graph. Validated at construction: ids in range, no
// self loops, non-negative integer weights, connected. Immutable afterwards;
// safe to share across concurrent readers.
class RoadGraph {
 public:
  RoadGraph(std::uint32_t node_count, const std::vector<GraphEdge>& edges);

  // width x height grid with unit edge weights; node id = row * width + col.
  static RoadGraph grid(std::uint32_t width, std::uint32_t height);

  // Plain-text edge list: a `nodes N` header line, then one `u v w` triple per
  // line. `#` starts a comment, blank lines are skipped.
  static RoadGraph load(std::istream& in);
  static RoadGraph load_file(const std::string& path);

  std::uint32_t node_count() const { return node_count_; }
  std::uint64_t edge_count() const { return adj_.size() / 2; }

  // Exact shortest-path distance (Dijkstra with early exit).
  Dist shortest_path_dist(NodeId u, NodeId v) const;

  // Distances from one source to every node.
  std::vector<Dist> distances_from(NodeId source) const;

  // Min distance to any of `sources` for every node (multi-source Dijkstra).
  std::vector<Dist> distances_from_set(const std::vector<NodeId>& sources) const;

  // Max shortest-path distance over all pairs. O(V) Dijkstra runs.
  Dist diameter() const;

 private:
  void check_node(NodeId id) const;

  std::uint32_t node_count_ = 0;
  std::vector<std::uint32_t> offsets_;                 // CSR, size node_count_+1
  std::vector<std::pair<NodeId, std::uint64_t>> adj_;  // (neighbor, weight)
};

// Parameters of one embedding/protocol configuration. `eta` reference sets,
// coordinates decomposed into num_blocks blocks of block_bits bits.
struct EmbeddingConfig {
  std::uint32_t eta = 8;
  std::uint32_t block_bits = 2;   // the protocol's l
  std::uint32_t num_blocks = 5;   // the protocol's m
  std::uint64_t seed = 0;
  std::uint32_t ref_set_size = 0;  // 0 = ceil(log2(node_count))

  // 2^(block_bits * num_blocks), exclusive upper bound for coordinates.
  std::uint64_t coord_bound() const;

  void validate() const;
  // Checks the overflow-freedom requirement: coord_bound() > graph diameter.
  void validate_for_graph(const RoadGraph& g) const;

  bool same_shape(const EmbeddingConfig& other) const {
    return eta == other.eta && block_bits == other.block_bits && num_blocks == other.num_blocks;
  }
};

// eta node subsets; coordinate i of an embedding is the min distance to sets[i].
struct ReferenceSets {
  std::vector<std::vector<NodeId>> sets;

  std::uint32_t eta() const { return static_cast<std::uint32_t>(sets.size()); }
  void validate(const RoadGraph& g, const EmbeddingConfig& cfg) const;
};

// One location encoding: eta coordinates, each within coord_bound().
struct RneVector {
  std::vector<std::uint64_t> coords;

  std::uint32_t size() const { return static_cast<std::uint32_t>(coords.size()); }
  bool operator==(const RneVector&) const = default;
  bool operator<(const RneVector& other) const { return coords < other.coords; }
};

// Samples cfg.eta reference sets (each without replacement; sets need not be
// disjoint). Deterministic for a fixed rng seed.
ReferenceSets build_reference_sets(const RoadGraph& g, const EmbeddingConfig& cfg, Rng& rng);

// coords[i] = min over r in refs.sets[i] of shortest_path_dist(g, u, r).
RneVector embed(const RoadGraph& g, const ReferenceSets& refs, const EmbeddingConfig& cfg,
                NodeId u);

// max_i |a_i - b_i|
std::uint64_t rne_distance(const RneVector& a, const RneVector& b);

// Precomputes one distance table per reference set (multi-source Dijkstra), so
// embedding any node afterwards costs O(eta) lookups. Matches embed() exactly.
class Embedder {
 public:
  Embedder(const RoadGraph& g, const ReferenceSets& refs, const EmbeddingConfig& cfg);

  RneVector embed(NodeId u) const;
  std::vector<RneVector> embed_all() const;
  std::uint32_t node_count() const { return node_count_; }

 private:
  EmbeddingConfig cfg_;
  std::uint32_t node_count_ = 0;
  std::vector<std::vector<Dist>> set_dist_;  // [eta][node]
};

// Sidecar serialization used by the attack-side tooling (the embedding is
// public system knowledge; only locations are private).
std::string reference_sets_to_json(const ReferenceSets& refs, const EmbeddingConfig& cfg);
std::pair<ReferenceSets, EmbeddingConfig> reference_sets_from_json(const std::string& text);

}  // namespace orh
