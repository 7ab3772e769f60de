#include "orh/attack.hpp"

#include <algorithm>
#include <string>

#include <json.hpp>

#include "orh/block_codec.hpp"
#include "orh/errors.hpp"

namespace orh {

BlockCandidateSet::BlockCandidateSet(std::uint32_t block_bits) : block_bits_(block_bits) {
  check_block_bits(block_bits);
  max_value_ = static_cast<std::int32_t>((1u << block_bits) - 1);
}

void BlockCandidateSet::observe(std::int32_t diff) {
  if (diff < -max_value_ || diff > max_value_) {
    fail(Errc::inconsistent_observation,
         "difference " + std::to_string(diff) + " impossible for " +
             std::to_string(block_bits_) + "-bit blocks");
  }
  const std::int32_t new_min = observed_.empty() ? diff : std::min(min_diff_, diff);
  const std::int32_t new_max = observed_.empty() ? diff : std::max(max_diff_, diff);
  const std::int32_t lo = std::max(0, -new_min);
  const std::int32_t hi = max_value_ - std::max(0, new_max);
  if (lo > hi) {
    fail(Errc::inconsistent_observation,
         "differences " + std::to_string(new_min) + ".." + std::to_string(new_max) +
             " leave no possible rider block");
  }
  min_diff_ = new_min;
  max_diff_ = new_max;
  observed_.insert(diff);
}

std::uint32_t BlockCandidateSet::lo() const {
  if (observed_.empty()) return 0;
  return static_cast<std::uint32_t>(std::max(0, -min_diff_));
}

std::uint32_t BlockCandidateSet::hi() const {
  if (observed_.empty()) return static_cast<std::uint32_t>(max_value_);
  return static_cast<std::uint32_t>(max_value_ - std::max(0, max_diff_));
}

std::uint32_t BlockCandidateSet::value() const {
  if (!singleton()) {
    fail(Errc::inconsistent_observation, "candidate set is not a singleton yet");
  }
  return lo();
}

std::uint32_t recover_block_value(const std::vector<std::int64_t>& diffs,
                                  std::uint32_t block_bits) {
  check_block_bits(block_bits);
  const std::size_t expected = std::size_t{1} << block_bits;
  if (diffs.size() != expected) {
    fail(Errc::malformed_difference_set, "need exactly " + std::to_string(expected) +
                                             " differences, got " + std::to_string(diffs.size()));
  }
  std::vector<std::int64_t> sorted = diffs;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t n = 1; n < sorted.size(); ++n) {
    if (sorted[n] != sorted[n - 1] + 1) {
      fail(Errc::malformed_difference_set, "differences do not form a contiguous run");
    }
  }
  const std::int64_t from_min = -sorted.front();
  const std::int64_t from_max = static_cast<std::int64_t>(expected - 1) - sorted.back();
  if (from_min != from_max || from_min < 0 || from_min >= static_cast<std::int64_t>(expected)) {
    fail(Errc::malformed_difference_set, "difference run is not anchored at a valid block value");
  }
  return static_cast<std::uint32_t>(from_min);
}

AttackState::AttackState(std::uint32_t eta, std::uint32_t block_bits, std::uint32_t num_blocks)
    : eta_(eta), block_bits_(block_bits), num_blocks_(num_blocks) {
  EmbeddingConfig shape;
  shape.eta = eta;
  shape.block_bits = block_bits;
  shape.num_blocks = num_blocks;
  shape.validate();
  cells_.assign(eta, std::vector<BlockCandidateSet>(num_blocks, BlockCandidateSet(block_bits)));
}

const BlockCandidateSet& AttackState::cell(std::uint32_t coordinate, std::uint32_t block) const {
  if (coordinate >= eta_ || block >= num_blocks_) {
    fail(Errc::config_mismatch, "cell index outside the attack state shape");
  }
  return cells_[coordinate][block];
}

namespace {

std::vector<std::vector<std::int32_t>> descale_driver(
    const std::vector<std::vector<std::int64_t>>& scaled, std::uint32_t eta,
    std::uint32_t block_bits, std::uint32_t num_blocks) {
  if (scaled.size() != eta) {
    fail(Errc::config_mismatch, "driver leak has wrong coordinate count");
  }
  std::vector<std::vector<std::int32_t>> out(eta, std::vector<std::int32_t>(num_blocks, 0));
  for (std::uint32_t i = 0; i < eta; ++i) {
    if (scaled[i].size() != num_blocks) {
      fail(Errc::config_mismatch, "driver leak has wrong block count");
    }
    for (std::uint32_t j = 0; j < num_blocks; ++j) {
      out[i][j] = ScaledDiff{j, scaled[i][j]}.unscaled(block_bits);
    }
  }
  return out;
}

}  // namespace

void AttackState::observe_driver(std::uint32_t driver_id,
                                 const std::vector<std::vector<std::int64_t>>& scaled_diffs) {
  const auto unscaled = descale_driver(scaled_diffs, eta_, block_bits_, num_blocks_);
  // Dry-run all cells before committing anything.
  for (std::uint32_t i = 0; i < eta_; ++i) {
    for (std::uint32_t j = 0; j < num_blocks_; ++j) {
      BlockCandidateSet probe = cells_[i][j];
      probe.observe(unscaled[i][j]);
    }
  }
  for (std::uint32_t i = 0; i < eta_; ++i) {
    for (std::uint32_t j = 0; j < num_blocks_; ++j) {
      cells_[i][j].observe(unscaled[i][j]);
      ++observation_count_;
    }
  }
  driver_diffs_.push_back(DriverDiffs{driver_id, unscaled});
}

void AttackState::observe(const MatchTranscript& transcript) {
  if (transcript.eta != eta_ || transcript.block_bits != block_bits_ ||
      transcript.num_blocks != num_blocks_) {
    fail(Errc::config_mismatch, "transcript shape disagrees with the attack state");
  }
  // Validate the whole transcript before committing any of it: de-scale every
  // driver and check that each cell's interval stays non-empty under the
  // combined min/max of current and incoming differences.
  std::vector<std::vector<std::vector<std::int32_t>>> unscaled;
  unscaled.reserve(transcript.per_driver.size());
  for (const DriverLeak& leak : transcript.per_driver) {
    unscaled.push_back(descale_driver(leak.scaled_diffs, eta_, block_bits_, num_blocks_));
  }
  for (std::uint32_t i = 0; i < eta_; ++i) {
    for (std::uint32_t j = 0; j < num_blocks_; ++j) {
      BlockCandidateSet probe = cells_[i][j];
      for (const auto& driver : unscaled) probe.observe(driver[i][j]);
    }
  }
  for (std::size_t k = 0; k < transcript.per_driver.size(); ++k) {
    for (std::uint32_t i = 0; i < eta_; ++i) {
      for (std::uint32_t j = 0; j < num_blocks_; ++j) {
        cells_[i][j].observe(unscaled[k][i][j]);
        ++observation_count_;
      }
    }
    driver_diffs_.push_back(DriverDiffs{transcript.per_driver[k].driver_id, unscaled[k]});
  }
}

RecoveredLocations AttackState::recover() const {
  RecoveredLocations rec;
  rec.drivers_consumed = driver_diffs_.size();
  rec.rider_blocks.assign(eta_, std::vector<BlockInterval>(num_blocks_));
  rec.complete = true;
  for (std::uint32_t i = 0; i < eta_; ++i) {
    for (std::uint32_t j = 0; j < num_blocks_; ++j) {
      rec.rider_blocks[i][j] = BlockInterval{cells_[i][j].lo(), cells_[i][j].hi()};
      if (!cells_[i][j].singleton()) rec.complete = false;
    }
  }
  if (!rec.complete) return rec;

  RneVector rider;
  rider.coords.reserve(eta_);
  for (std::uint32_t i = 0; i < eta_; ++i) {
    BlockVector bv;
    bv.block_bits = block_bits_;
    bv.blocks.resize(num_blocks_);
    for (std::uint32_t j = 0; j < num_blocks_; ++j) bv.blocks[j] = cells_[i][j].value();
    rider.coords.push_back(recompose(bv));
  }
  for (const DriverDiffs& driver : driver_diffs_) {
    RneVector vec;
    vec.coords.reserve(eta_);
    for (std::uint32_t i = 0; i < eta_; ++i) {
      BlockVector bv;
      bv.block_bits = block_bits_;
      bv.blocks.resize(num_blocks_);
      for (std::uint32_t j = 0; j < num_blocks_; ++j) {
        // In-range by construction: the narrowed rider block admits every
        // observed difference.
        bv.blocks[j] = static_cast<std::uint32_t>(
            static_cast<std::int32_t>(cells_[i][j].value()) + driver.unscaled[i][j]);
      }
      vec.coords.push_back(recompose(bv));
    }
    rec.drivers[driver.driver_id] = std::move(vec);
  }
  rec.rider = std::move(rider);
  return rec;
}

RecoveredLocations refine_with_embedding(const AttackState& state, const RoadGraph& g,
                                         const ReferenceSets& refs, const EmbeddingConfig& cfg) {
  if (cfg.eta != state.eta() || cfg.block_bits != state.block_bits() ||
      cfg.num_blocks != state.num_blocks()) {
    fail(Errc::config_mismatch, "embedding config disagrees with the attack state");
  }
  RecoveredLocations rec = state.recover();
  if (rec.complete || state.drivers_consumed() == 0) return rec;

  const Embedder embedder(g, refs, cfg);
  std::vector<RneVector> table = embedder.embed_all();
  std::sort(table.begin(), table.end());
  table.erase(std::unique(table.begin(), table.end()), table.end());

  // Per-driver full coordinate differences S(driver) - S(rider), exact from
  // the stored per-block values.
  std::vector<std::vector<std::int64_t>> deltas;
  deltas.reserve(state.driver_diffs().size());
  for (const AttackState::DriverDiffs& driver : state.driver_diffs()) {
    std::vector<std::int64_t> delta(state.eta(), 0);
    for (std::uint32_t i = 0; i < state.eta(); ++i) {
      std::int64_t sum = 0;
      for (std::uint32_t j = 0; j < state.num_blocks(); ++j) {
        sum += static_cast<std::int64_t>(driver.unscaled[i][j])
               << (j * state.block_bits());
      }
      delta[i] = sum;
    }
    deltas.push_back(std::move(delta));
  }

  const auto in_table = [&table](const RneVector& v) {
    return std::binary_search(table.begin(), table.end(), v);
  };
  const std::uint64_t bound = cfg.coord_bound();

  std::vector<const RneVector*> survivors;
  for (const RneVector& candidate : table) {
    bool ok = true;
    // (a) candidate must fit every block interval narrowed so far
    for (std::uint32_t i = 0; i < state.eta() && ok; ++i) {
      const BlockVector bv = decompose(candidate.coords[i], cfg.block_bits, cfg.num_blocks);
      for (std::uint32_t j = 0; j < state.num_blocks(); ++j) {
        if (!state.cell(i, j).contains(bv.blocks[j])) {
          ok = false;
          break;
        }
      }
    }
    // (b) candidate + every observed driver delta must be embeddable
    for (std::size_t k = 0; k < deltas.size() && ok; ++k) {
      RneVector shifted;
      shifted.coords.resize(state.eta());
      for (std::uint32_t i = 0; i < state.eta(); ++i) {
        const std::int64_t c = static_cast<std::int64_t>(candidate.coords[i]) + deltas[k][i];
        if (c < 0 || static_cast<std::uint64_t>(c) >= bound) {
          ok = false;
          break;
        }
        shifted.coords[i] = static_cast<std::uint64_t>(c);
      }
      if (ok && !in_table(shifted)) ok = false;
    }
    if (ok) {
      survivors.push_back(&candidate);
      if (survivors.size() > 1) break;
    }
  }
  if (survivors.size() != 1) return rec;  // still ambiguous, keep block-level result

  const RneVector& rider = *survivors.front();
  rec.complete = true;
  rec.refined = true;
  rec.rider = rider;
  for (std::uint32_t i = 0; i < state.eta(); ++i) {
    const BlockVector bv = decompose(rider.coords[i], cfg.block_bits, cfg.num_blocks);
    for (std::uint32_t j = 0; j < state.num_blocks(); ++j) {
      rec.rider_blocks[i][j] = BlockInterval{bv.blocks[j], bv.blocks[j]};
    }
  }
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    RneVector vec;
    vec.coords.reserve(state.eta());
    for (std::uint32_t i = 0; i < state.eta(); ++i) {
      vec.coords.push_back(
          static_cast<std::uint64_t>(static_cast<std::int64_t>(rider.coords[i]) + deltas[k][i]));
    }
    rec.drivers[state.driver_diffs()[k].driver_id] = std::move(vec);
  }
  return rec;
}

std::vector<NodeId> invert_to_nodes(const RoadGraph& g, const ReferenceSets& refs,
                                    const EmbeddingConfig& cfg, const RneVector& vec) {
  if (vec.size() != cfg.eta) {
    fail(Errc::dimension_mismatch, "vector length " + std::to_string(vec.size()) +
                                       " does not match eta " + std::to_string(cfg.eta));
  }
  const Embedder embedder(g, refs, cfg);
  std::vector<NodeId> out;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (embedder.embed(u) == vec) out.push_back(u);
  }
  return out;
}

std::string recovery_to_json(const RecoveredLocations& rec, const RecoveryReportOptions& opts) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json per_block = nlohmann::ordered_json::array();
  for (std::uint32_t i = 0; i < rec.rider_blocks.size(); ++i) {
    for (std::uint32_t j = 0; j < rec.rider_blocks[i].size(); ++j) {
      per_block.push_back({{"coordinate", i},
                           {"block", j},
                           {"candidates_lo", rec.rider_blocks[i][j].lo},
                           {"candidates_hi", rec.rider_blocks[i][j].hi}});
    }
  }
  doc["per_block"] = std::move(per_block);
  if (rec.rider.has_value()) {
    doc["rider_vec"] = rec.rider->coords;
  }
  nlohmann::ordered_json drivers = nlohmann::ordered_json::object();
  for (const auto& [id, vec] : rec.drivers) {
    drivers[std::to_string(id)] = vec.coords;
  }
  doc["drivers"] = std::move(drivers);
  doc["complete"] = rec.complete;
  doc["drivers_consumed"] = rec.drivers_consumed;
  doc["refined"] = rec.refined;

  if (opts.truth != nullptr && opts.truth->rider_truth.has_value()) {
    nlohmann::ordered_json match;
    match["rider"] = rec.rider.has_value() && *rec.rider == opts.truth->rider_truth->vec;
    nlohmann::ordered_json driver_match = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < opts.truth->driver_truth.size(); ++k) {
      const std::uint32_t id = opts.truth->per_driver[k].driver_id;
      const auto it = rec.drivers.find(id);
      driver_match[std::to_string(id)] =
          it != rec.drivers.end() && it->second == opts.truth->driver_truth[k].vec;
    }
    match["drivers"] = std::move(driver_match);
    doc["exact_match"] = std::move(match);
  }
  if (opts.rider_nodes != nullptr) {
    doc["rider_nodes"] = *opts.rider_nodes;
  }
  return doc.dump(2) + "\n";
}

}  // namespace orh
