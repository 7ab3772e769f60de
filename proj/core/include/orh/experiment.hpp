#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "orh/protocol_sim.hpp"
#include "orh/rng.hpp"
#include "orh/road_network.hpp"

namespace orh {

// Stream ids carving independent rng lanes out of one master seed. Every
// random decision of an experiment run derives from (seed, stream), so reruns
// are byte-identical and queries are independent of each other.
inline constexpr std::uint64_t kStreamReferenceSets = 0xA001;
inline constexpr std::uint64_t kStreamQueryBase = 0xB0000000ULL;
inline constexpr std::uint64_t kStreamCouponBase = 0xC0000000ULL;

// One simulated ride request: the server-side outcome plus the harness-side
// ground truth (the transcript itself carries truth only when requested).
struct SimulatedQuery {
  MatchResult result;
  MatchTranscript transcript;
  RneVector rider_vec;
  std::vector<RneVector> driver_vecs;
  std::optional<NodeId> rider_node;
  std::vector<NodeId> driver_nodes;  // empty for uniform-vector queries
};

// Rider and drivers placed uniformly at random on graph nodes.
SimulatedQuery simulate_graph_query(const Embedder& embedder, const EmbeddingConfig& cfg,
                                    std::uint32_t driver_count, Rng& rng, bool attach_truth);

// Rider and driver vectors drawn uniformly from the full coordinate range;
// models the idealized uniform-block population with no graph underneath.
SimulatedQuery simulate_uniform_query(const EmbeddingConfig& cfg, std::uint32_t driver_count,
                                      Rng& rng, bool attach_truth);

}  // namespace orh
