#include "orh/attack.hpp"

#include <algorithm>

#include <doctest.h>

#include "orh/experiment.hpp"
#include "orh/rng.hpp"
#include "test_util.hpp"

using namespace orh;

namespace {

EmbeddingConfig make_config(std::uint32_t eta, std::uint32_t l, std::uint32_t m) {
  EmbeddingConfig cfg;
  cfg.eta = eta;
  cfg.block_bits = l;
  cfg.num_blocks = m;
  return cfg;
}

// Hand-built transcript: one leak row per driver, [coordinate][block] scaled values.
MatchTranscript make_transcript(std::uint32_t eta, std::uint32_t l, std::uint32_t m,
                                const std::vector<std::vector<std::vector<std::int64_t>>>& leaks) {
  MatchTranscript t;
  t.eta = eta;
  t.block_bits = l;
  t.num_blocks = m;
  for (std::uint32_t k = 0; k < leaks.size(); ++k) {
    DriverLeak leak;
    leak.driver_id = k;
    leak.scaled_diffs = leaks[k];
    for (std::uint32_t i = 0; i < eta; ++i) {
      std::int64_t sum = 0;
      for (std::uint32_t j = 0; j < m; ++j) sum += leaks[k][i][j];
      leak.coord_diffs.push_back(sum);
      leak.distance = std::max<std::uint64_t>(leak.distance, std::llabs(sum));
    }
    t.per_driver.push_back(std::move(leak));
  }
  return t;
}

}  // namespace

TEST_CASE("candidate sets narrow exactly as the difference bounds dictate") {
  SUBCASE("one-bit worked sequence") {
    BlockCandidateSet cell(1);
    CHECK(cell.lo() == 0);
    CHECK(cell.hi() == 1);
    CHECK_FALSE(cell.singleton());
    cell.observe(0);  // both (0,0) and (1,1) remain possible
    CHECK(cell.lo() == 0);
    CHECK(cell.hi() == 1);
    cell.observe(-1);  // only rider block 1 admits a -1 difference
    CHECK(cell.singleton());
    CHECK(cell.value() == 1);
    CHECK(cell.observed_diffs() == std::set<std::int32_t>{-1, 0});
  }

  SUBCASE("boundary difference pins the extreme immediately") {
    BlockCandidateSet cell(2);
    cell.observe(3);
    CHECK(cell.singleton());
    CHECK(cell.value() == 0);

    BlockCandidateSet other(2);
    other.observe(-3);
    CHECK(other.singleton());
    CHECK(other.value() == 3);
  }

  SUBCASE("impossible differences are rejected and leave the set intact") {
    BlockCandidateSet cell(2);
    cell.observe(3);
    CHECK_ERRC(cell.observe(-1), Errc::inconsistent_observation);
    CHECK(cell.singleton());
    CHECK(cell.value() == 0);
    CHECK_ERRC(cell.observe(4), Errc::inconsistent_observation);  // out of range
    CHECK(cell.observed_diffs().size() == 1);
  }

  SUBCASE("narrowing is monotone and sound on random walks") {
    Rng rng(404);
    for (int iter = 0; iter < 400; ++iter) {
      const std::uint32_t l = 1 + static_cast<std::uint32_t>(rng.uniform(8));
      const std::uint32_t truth = static_cast<std::uint32_t>(rng.uniform(1ULL << l));
      BlockCandidateSet cell(l);
      std::uint64_t last_count = cell.count();
      for (int step = 0; step < 40; ++step) {
        const std::uint32_t other = static_cast<std::uint32_t>(rng.uniform(1ULL << l));
        cell.observe(static_cast<std::int32_t>(other) - static_cast<std::int32_t>(truth));
        CHECK(cell.contains(truth));
        CHECK(cell.lo() <= cell.hi());
        CHECK(cell.count() <= last_count);
        last_count = cell.count();
      }
    }
  }
}

TEST_CASE("complete difference sets recover the block uniquely") {
  CHECK(recover_block_value({-1, 0}, 1) == 1);
  CHECK(recover_block_value({0, 1}, 1) == 0);
  CHECK(recover_block_value({3, 0, 2, 1}, 2) == 0);
  CHECK(recover_block_value({-2, 1, 0, -1}, 2) == 2);

  SUBCASE("exhaustive over every block width and value") {
    Rng rng(606);
    std::uint64_t cases = 0;
    for (std::uint32_t l = 1; l <= 8; ++l) {
      const std::uint32_t n = 1u << l;
      for (std::uint32_t truth = 0; truth < n; ++truth) {
        std::vector<std::int64_t> diffs;
        for (std::uint32_t z = 0; z < n; ++z) {
          diffs.push_back(static_cast<std::int64_t>(z) - truth);
        }
        rng.shuffle(diffs);  // order must not matter
        // both recovery routes agree: -min == (2^l - 1) - max
        const auto [mn, mx] = std::minmax_element(diffs.begin(), diffs.end());
        CHECK(-*mn == static_cast<std::int64_t>(n - 1) - *mx);
        if (recover_block_value(diffs, l) != truth) {
          FAIL("recovery broke at l=", l, " truth=", truth);
        }
        ++cases;
      }
    }
    CHECK(cases == 510);  // 2 + 4 + ... + 256
  }

  SUBCASE("malformed difference sets are rejected") {
    CHECK_ERRC(recover_block_value({0}, 1), Errc::malformed_difference_set);          // size
    CHECK_ERRC(recover_block_value({0, 0}, 1), Errc::malformed_difference_set);       // dup
    CHECK_ERRC(recover_block_value({-1, 1}, 1), Errc::malformed_difference_set);      // gap
    CHECK_ERRC(recover_block_value({1, 2}, 1), Errc::malformed_difference_set);       // anchor
    CHECK_ERRC(recover_block_value({-4, -3, -2, -1}, 2), Errc::malformed_difference_set);
  }
}

TEST_CASE("attack state narrows per cell and rebuilds exact vectors") {
  SUBCASE("fresh state reports full intervals and no vectors") {
    const AttackState state(2, 2, 3);
    const RecoveredLocations rec = state.recover();
    CHECK_FALSE(rec.complete);
    CHECK_FALSE(rec.rider.has_value());
    CHECK(rec.drivers.empty());
    CHECK(rec.drivers_consumed == 0);
    for (const auto& coord : rec.rider_blocks) {
      for (const BlockInterval& iv : coord) {
        CHECK(iv == BlockInterval{0, 3});
      }
    }
  }

  SUBCASE("shape mismatches are rejected") {
    AttackState state(2, 2, 3);
    const MatchTranscript t = make_transcript(2, 2, 2, {});
    CHECK_ERRC(state.observe(t), Errc::config_mismatch);
  }

  SUBCASE("one ambiguous cell keeps the state incomplete") {
    AttackState state(2, 1, 1);
    // rider blocks: coord0 = 1, coord1 = 0; one driver at (0, 0)
    state.observe(make_transcript(2, 1, 1, {{{-1}, {0}}}));
    const RecoveredLocations rec = state.recover();
    CHECK_FALSE(rec.complete);
    CHECK(rec.rider_blocks[0][0] == BlockInterval{1, 1});
    CHECK(rec.rider_blocks[1][0] == BlockInterval{0, 1});
    CHECK(rec.drivers_consumed == 1);
    CHECK_FALSE(rec.rider.has_value());
  }

  SUBCASE("uniform-vector population is recovered completely and exactly") {
    const EmbeddingConfig cfg = make_config(4, 2, 5);
    Rng rng(1234);
    const SimulatedQuery q = simulate_uniform_query(cfg, 100, rng, true);
    AttackState state(cfg);
    state.observe(q.transcript);
    const RecoveredLocations rec = state.recover();
    REQUIRE(rec.complete);
    CHECK_FALSE(rec.refined);
    CHECK(*rec.rider == q.rider_vec);
    REQUIRE(rec.drivers.size() == q.driver_vecs.size());
    for (std::uint32_t k = 0; k < q.driver_vecs.size(); ++k) {
      CHECK(rec.drivers.at(k) == q.driver_vecs[k]);
    }
  }

  SUBCASE("forged transcripts throw and leave the state untouched") {
    AttackState state(1, 2, 1);
    state.observe(make_transcript(1, 2, 1, {{{3}}}));  // pins rider block to 0
    CHECK(state.cell(0, 0).singleton());

    // a -1 difference is impossible if the rider block is 0
    const MatchTranscript forged = make_transcript(1, 2, 1, {{{-1}}});
    CHECK_ERRC(state.observe(forged), Errc::inconsistent_observation);
    CHECK(state.drivers_consumed() == 1);
    CHECK(state.cell(0, 0).value() == 0);

    // scaled value that is not a multiple of the block weight
    AttackState stray(1, 2, 2);
    const MatchTranscript odd = make_transcript(1, 2, 2, {{{0, 6}}});
    CHECK_ERRC(stray.observe(odd), Errc::inconsistent_observation);
    CHECK(stray.drivers_consumed() == 0);
  }

  SUBCASE("accumulation across transcripts of the same rider narrows further") {
    AttackState state(1, 1, 1);
    state.observe(make_transcript(1, 1, 1, {{{0}}}));
    CHECK_FALSE(state.cell(0, 0).singleton());
    state.observe(make_transcript(1, 1, 1, {{{-1}}}));
    CHECK(state.cell(0, 0).singleton());
    CHECK(state.cell(0, 0).value() == 1);
    CHECK(state.drivers_consumed() == 2);
    CHECK(state.observation_count() == 2);
  }
}

TEST_CASE("soundness: the true rider block stays inside every interval") {
  const RoadGraph grid = RoadGraph::grid(8, 8);
  const EmbeddingConfig cfg = make_config(6, 2, 4);
  Rng master(555);
  Rng refs_rng = master.derive(kStreamReferenceSets);
  const ReferenceSets refs = build_reference_sets(grid, cfg, refs_rng);
  const Embedder embedder(grid, refs, cfg);

  for (std::uint32_t query = 0; query < 30; ++query) {
    Rng rng = master.derive(kStreamQueryBase + query);
    const SimulatedQuery q = simulate_graph_query(embedder, cfg, 25, rng, true);
    AttackState state(cfg);
    std::vector<BlockVector> truth_blocks;
    for (std::uint32_t i = 0; i < cfg.eta; ++i) {
      truth_blocks.push_back(decompose(q.rider_vec.coords[i], cfg.block_bits, cfg.num_blocks));
    }
    for (const DriverLeak& leak : q.transcript.per_driver) {
      state.observe_driver(leak.driver_id, leak.scaled_diffs);
      for (std::uint32_t i = 0; i < cfg.eta; ++i) {
        for (std::uint32_t j = 0; j < cfg.num_blocks; ++j) {
          if (!state.cell(i, j).contains(truth_blocks[i].blocks[j])) {
            FAIL("truth escaped the candidate interval at query ", query);
          }
        }
      }
    }
  }
}

TEST_CASE("embedding refinement pins what block narrowing alone cannot") {
  const RoadGraph grid = RoadGraph::grid(10, 10);
  const EmbeddingConfig cfg = make_config(8, 2, 5);
  Rng master(42);
  Rng refs_rng = master.derive(kStreamReferenceSets);
  const ReferenceSets refs = build_reference_sets(grid, cfg, refs_rng);
  const Embedder embedder(grid, refs, cfg);

  Rng rng = master.derive(kStreamQueryBase);
  const SimulatedQuery q = simulate_graph_query(embedder, cfg, 200, rng, true);
  AttackState state(cfg);
  state.observe(q.transcript);

  // Grid coordinates never reach the upper blocks, so their intervals cannot
  // collapse from differences alone.
  const RecoveredLocations base = state.recover();
  CHECK_FALSE(base.complete);

  const RecoveredLocations refined = refine_with_embedding(state, grid, refs, cfg);
  REQUIRE(refined.complete);
  CHECK(refined.refined);
  CHECK(*refined.rider == q.rider_vec);
  REQUIRE(refined.drivers.size() == q.driver_vecs.size());
  for (std::uint32_t k = 0; k < q.driver_vecs.size(); ++k) {
    CHECK(refined.drivers.at(k) == q.driver_vecs[k]);
  }
  for (std::uint32_t i = 0; i < cfg.eta; ++i) {
    const BlockVector bv = decompose(q.rider_vec.coords[i], cfg.block_bits, cfg.num_blocks);
    for (std::uint32_t j = 0; j < cfg.num_blocks; ++j) {
      CHECK(refined.rider_blocks[i][j] == BlockInterval{bv.blocks[j], bv.blocks[j]});
    }
  }

  SUBCASE("refinement without observations returns the base state") {
    const AttackState empty(cfg);
    const RecoveredLocations rec = refine_with_embedding(empty, grid, refs, cfg);
    CHECK_FALSE(rec.complete);
    CHECK_FALSE(rec.refined);
  }

  SUBCASE("refinement rejects mismatched configs") {
    const AttackState other(3, 2, 5);
    CHECK_ERRC(refine_with_embedding(other, grid, refs, cfg), Errc::config_mismatch);
  }
}

TEST_CASE("preimage inversion finds exactly the matching nodes") {
  const RoadGraph grid = RoadGraph::grid(6, 6);
  const EmbeddingConfig cfg = make_config(5, 2, 3);
  Rng rng(9);
  const ReferenceSets refs = build_reference_sets(grid, cfg, rng);
  const Embedder embedder(grid, refs, cfg);

  for (NodeId u = 0; u < grid.node_count(); ++u) {
    const RneVector vec = embedder.embed(u);
    const std::vector<NodeId> nodes = invert_to_nodes(grid, refs, cfg, vec);
    CHECK(std::find(nodes.begin(), nodes.end(), u) != nodes.end());
    for (const NodeId v : nodes) CHECK(embedder.embed(v) == vec);
  }

  RneVector unreachable;
  unreachable.coords.assign(cfg.eta, 63);  // beyond the 6x6 diameter of 10
  CHECK(invert_to_nodes(grid, refs, cfg, unreachable).empty());
  CHECK_ERRC(invert_to_nodes(grid, refs, cfg, RneVector{{1, 2}}), Errc::dimension_mismatch);

  SUBCASE("preimage sizes on the 10x10 grid at eta=8") {
    const RoadGraph big = RoadGraph::grid(10, 10);
    const EmbeddingConfig big_cfg = make_config(8, 2, 5);
    Rng big_rng(42);
    const ReferenceSets big_refs = build_reference_sets(big, big_cfg, big_rng);
    const Embedder big_embedder(big, big_refs, big_cfg);
    std::uint64_t preimage_total = 0;
    for (NodeId u = 0; u < big.node_count(); ++u) {
      const auto nodes = invert_to_nodes(big, big_refs, big_cfg, big_embedder.embed(u));
      CHECK(!nodes.empty());
      preimage_total += nodes.size();
    }
    const double mean = static_cast<double>(preimage_total) / big.node_count();
    MESSAGE("mean preimage size on 10x10/eta=8: ", mean);
    CHECK(mean >= 1.0);
    CHECK(mean <= 4.0);  // eight random reference sets separate the grid well
  }
}

TEST_CASE("recovery reports serialize the narrowing state") {
  const EmbeddingConfig cfg = make_config(2, 2, 2);
  Rng rng(77);
  const SimulatedQuery q = simulate_uniform_query(cfg, 60, rng, true);
  AttackState state(cfg);
  state.observe(q.transcript);
  const RecoveredLocations rec = state.recover();
  REQUIRE(rec.complete);

  RecoveryReportOptions opts;
  opts.truth = &q.transcript;
  const std::string text = recovery_to_json(rec, opts);
  CHECK(text.find("\"per_block\"") != std::string::npos);
  CHECK(text.find("\"candidates_lo\"") != std::string::npos);
  CHECK(text.find("\"rider_vec\"") != std::string::npos);
  CHECK(text.find("\"drivers_consumed\": 60") != std::string::npos);
  CHECK(text.find("\"complete\": true") != std::string::npos);
  CHECK(text.find("\"refined\": false") != std::string::npos);
  CHECK(text.find("\"exact_match\"") != std::string::npos);
  CHECK(text.find("\"rider\": true") != std::string::npos);
}
