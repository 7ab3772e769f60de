#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "orh/protocol_sim.hpp"
#include "orh/road_network.hpp"

namespace orh {

// Candidate values for one rider block, narrowed as driver differences
// accumulate. An observed difference d = driver_block - rider_block rules out
// every x with x + d outside [0, 2^l - 1], so the candidate set is always the
// contiguous interval
//   [max(0, -min d), (2^l - 1) - max(0, max d)].
// With the complete difference set the interval collapses to the unique
// rider block; a single boundary difference (+/-(2^l - 1)) collapses it
// immediately.
class BlockCandidateSet {
 public:
  explicit BlockCandidateSet(std::uint32_t block_bits);

  // Narrows by one unscaled difference. Throws inconsistent_observation if
  // the set would become empty (forged or corrupt transcript); the state is
  // unchanged in that case.
  void observe(std::int32_t diff);

  std::uint32_t block_bits() const { return block_bits_; }
  std::uint32_t lo() const;
  std::uint32_t hi() const;
  std::uint64_t count() const { return static_cast<std::uint64_t>(hi()) - lo() + 1; }
  bool singleton() const { return lo() == hi(); }
  std::uint32_t value() const;  // requires singleton()

  bool contains(std::uint32_t x) const { return x >= lo() && x <= hi(); }
  const std::set<std::int32_t>& observed_diffs() const { return observed_; }

 private:
  std::uint32_t block_bits_;
  std::int32_t max_value_;  // 2^l - 1
  std::set<std::int32_t> observed_;
  std::int32_t min_diff_ = 0;  // valid only when !observed_.empty()
  std::int32_t max_diff_ = 0;
};

// Recovers the block value x from the complete difference set
// {z - x : 0 <= z < 2^l}: x = -min(diffs) = (2^l - 1) - max(diffs).
// Accepts scaled or unscaled input via `diffs` already de-scaled by caller.
// Throws malformed_difference_set unless the input is a permutation of a
// contiguous run of 2^l integers positioned so both recovery routes agree.
std::uint32_t recover_block_value(const std::vector<std::int64_t>& diffs,
                                  std::uint32_t block_bits);

struct BlockInterval {
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;
  bool operator==(const BlockInterval&) const = default;
};

// Output of the reconstruction: per-block intervals always; exact vectors for
// the rider and every observed driver once the state is complete.
struct RecoveredLocations {
  bool complete = false;
  std::vector<std::vector<BlockInterval>> rider_blocks;  // [coordinate][block]
  std::optional<RneVector> rider;
  std::map<std::uint32_t, RneVector> drivers;  // filled when complete
  std::uint64_t drivers_consumed = 0;
  // True when the embedding-table refinement (public graph knowledge), not
  // block narrowing alone, pinned the answer.
  bool refined = false;
};

// The passive attack state: one candidate set per (coordinate, block), plus
// the stored per-driver differences needed to reconstruct every driver once
// the rider is known. Single writer; feed observations sequentially.
class AttackState {
 public:
  AttackState(std::uint32_t eta, std::uint32_t block_bits, std::uint32_t num_blocks);
  explicit AttackState(const EmbeddingConfig& cfg)
      : AttackState(cfg.eta, cfg.block_bits, cfg.num_blocks) {}

  // Consumes every driver of one transcript. Validates the whole transcript
  // first and only then commits, so a throw leaves the state untouched.
  // Throws config_mismatch on shape disagreement, inconsistent_observation on
  // forged difference data.
  void observe(const MatchTranscript& transcript);

  // Consumes a single driver's leak (scaled differences, [coordinate][block]).
  void observe_driver(std::uint32_t driver_id,
                      const std::vector<std::vector<std::int64_t>>& scaled_diffs);

  RecoveredLocations recover() const;

  std::uint32_t eta() const { return eta_; }
  std::uint32_t block_bits() const { return block_bits_; }
  std::uint32_t num_blocks() const { return num_blocks_; }
  const BlockCandidateSet& cell(std::uint32_t coordinate, std::uint32_t block) const;
  std::uint64_t observation_count() const { return observation_count_; }
  std::uint64_t drivers_consumed() const { return driver_diffs_.size(); }

  struct DriverDiffs {
    std::uint32_t driver_id = 0;
    std::vector<std::vector<std::int32_t>> unscaled;  // [coordinate][block]
  };
  const std::vector<DriverDiffs>& driver_diffs() const { return driver_diffs_; }

 private:
  std::uint32_t eta_;
  std::uint32_t block_bits_;
  std::uint32_t num_blocks_;
  std::vector<std::vector<BlockCandidateSet>> cells_;  // [coordinate][block]
  std::vector<DriverDiffs> driver_diffs_;
  std::uint64_t observation_count_ = 0;
};

// Exhaustive refinement with public system knowledge. The road graph and the
// reference sets are infrastructure every participant can evaluate, so the
// server can embed all nodes and keep exactly the rider vectors S(u) that
// (a) fit every block candidate interval and (b) keep S(u) + delta_k inside
// the embeddable set for every observed driver delta. When one vector
// survives, the rider and all drivers are pinned exactly even though block
// narrowing alone still had slack (small graphs never exercise the high
// blocks, so their intervals cannot collapse from differences alone).
RecoveredLocations refine_with_embedding(const AttackState& state, const RoadGraph& g,
                                         const ReferenceSets& refs, const EmbeddingConfig& cfg);

// All nodes whose embedding equals `vec` (possibly none or several).
std::vector<NodeId> invert_to_nodes(const RoadGraph& g, const ReferenceSets& refs,
                                    const EmbeddingConfig& cfg, const RneVector& vec);

// Recovery report JSON:
//   {per_block: [{coordinate, block, candidates_lo, candidates_hi}],
//    rider_vec?, drivers: {id: vec}, complete, drivers_consumed, refined,
//    exact_match?: {rider, drivers: {id: bool}},   // when truth available
//    rider_nodes?: [...]}                          // when inversion requested
struct RecoveryReportOptions {
  const MatchTranscript* truth = nullptr;            // enables exact_match
  const std::vector<NodeId>* rider_nodes = nullptr;  // enables rider_nodes
};
std::string recovery_to_json(const RecoveredLocations& rec,
                             const RecoveryReportOptions& opts = {});

}  // namespace orh
