#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orh/block_codec.hpp"
#include "orh/rng.hpp"
#include "orh/road_network.hpp"

namespace orh {

// One masked guess the rider uploads for a single block: the scaled signed
// difference (guess - rider_block) * 2^(j*l). `guess` stands in for the
// pairing-based equality handle of the real protocol; the matching server
// never reads it directly, it only drives the simulated equality check. The
// masked value becomes visible to the server exactly when the check matches.
struct GuessToken {
  std::uint32_t guess = 0;
  std::int64_t masked_value = 0;
};

// The rider's upload for one ride request: per (coordinate, block), all 2^l
// guesses in a per-block random permutation. The permutation exists only in
// the token order here; it is never part of the server's transcript.
struct RideRequest {
  std::uint32_t eta = 0;
  std::uint32_t block_bits = 0;
  std::uint32_t num_blocks = 0;
  std::vector<std::vector<std::vector<GuessToken>>> tokens;  // [coordinate][block][slot]
};

// Commitment to one driver block value; opaque to the server except through
// the equality check against rider tokens.
struct BlockCommitment {
  std::uint32_t value = 0;
};

struct DriverResponse {
  std::uint32_t driver_id = 0;
  std::uint32_t eta = 0;
  std::uint32_t block_bits = 0;
  std::uint32_t num_blocks = 0;
  std::vector<std::vector<BlockCommitment>> commitments;  // [coordinate][block]
};

// Everything the honest-but-curious server ends up holding for one driver:
// the revealed scaled difference per (coordinate, block), the assembled
// signed per-coordinate differences, and the final distance.
struct DriverLeak {
  std::uint32_t driver_id = 0;
  std::vector<std::vector<std::int64_t>> scaled_diffs;  // [coordinate][block]
  std::vector<std::int64_t> coord_diffs;                // sum over blocks, per coordinate
  std::uint64_t distance = 0;                           // max_i |coord_diffs[i]|
};

// Ground truth attached to transcripts only when explicitly requested
// (oracle testing); never available to the attack itself.
struct HiddenLocation {
  std::optional<NodeId> node;
  RneVector vec;
};

// The server's complete view of one ride request.
struct MatchTranscript {
  std::uint32_t eta = 0;
  std::uint32_t block_bits = 0;
  std::uint32_t num_blocks = 0;
  std::vector<DriverLeak> per_driver;
  std::uint32_t winner = 0;

  std::optional<HiddenLocation> rider_truth;
  std::vector<HiddenLocation> driver_truth;  // parallel to per_driver when present

  bool same_shape(const EmbeddingConfig& cfg) const {
    return eta == cfg.eta && block_bits == cfg.block_bits && num_blocks == cfg.num_blocks;
  }
};

struct MatchResult {
  std::uint32_t winner = 0;
  std::map<std::uint32_t, std::uint64_t> distances;  // driver_id -> distance
};

// Builds the rider upload: per (coordinate, block), tokens for every guess in
// [0, 2^l), permuted by rng. Deterministic for a fixed rng state.
RideRequest rider_make_request(const RneVector& rider_vec, const EmbeddingConfig& cfg, Rng& rng);

// One commitment per (coordinate, block), carrying the driver's block value.
DriverResponse driver_make_response(std::uint32_t driver_id, const RneVector& driver_vec,
                                    const EmbeddingConfig& cfg);

// Simulated equality-check resolution for one block: returns the scaled
// difference (driver_block - rider_block) * 2^(j*l). Exactly one token can
// match a well-formed request; anything else throws no_match.
ScaledDiff sp_resolve_block_diff(const RideRequest& request, const DriverResponse& response,
                                 std::uint32_t coordinate, std::uint32_t block);

// Full matching round: resolves every block of every driver, assembles the
// per-coordinate differences and distances, picks the min-distance driver
// (ties broken by smallest driver id).
std::pair<MatchResult, MatchTranscript> sp_match(const RideRequest& request,
                                                 const std::vector<DriverResponse>& responses);

// Transcript JSON:
//   {config: {eta, l, m},
//    rider_hidden?: {node, coords},        // --reveal-truth only
//    drivers_hidden?: [{driver_id, node, coords}],
//    per_driver: [{driver_id, diffs: [[coordinate, block, scaled_value], ...], distance}],
//    winner}
std::string transcript_to_json(const MatchTranscript& t);
MatchTranscript transcript_from_json(const std::string& text);

}  // namespace orh
