// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Every tolerance is pinned in code; runs in well under a minute.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "graph_fixtures.hpp"
#include "orh/attack.hpp"
#include "orh/errors.hpp"
#include "orh/coupon_analysis.hpp"
#include "orh/experiment.hpp"
#include "orh/protocol_sim.hpp"
#include "orh/road_network.hpp"

using namespace orh;

namespace {

struct Criterion {
  int number;
  std::string name;
  std::function<bool(std::ostringstream&)> run;
};

// Every (l, m) geometry with l in [1,8] and l*m <= max_bits.
std::vector<std::pair<std::uint32_t, std::uint32_t>> geometries_up_to(std::uint32_t max_bits) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  for (std::uint32_t l = 1; l <= 8; ++l) {
    for (std::uint32_t m = 1; l * m <= max_bits; ++m) out.push_back({l, m});
  }
  return out;
}

// --- 1: full recovery on the grid experiment --------------------------------

bool criterion_full_recovery(std::ostringstream& log) {
  const RoadGraph grid = RoadGraph::grid(10, 10);
  const std::uint32_t kDrivers = 200;
  const std::uint32_t kQueries = 50;
  bool ok = true;
  for (const std::uint32_t l : {1u, 2u, 4u}) {
    EmbeddingConfig cfg;
    cfg.eta = 8;
    cfg.block_bits = l;
    cfg.num_blocks = 5;
    cfg.seed = 42;
    cfg.validate_for_graph(grid);
    const Rng master(cfg.seed);
    Rng refs_rng = master.derive(kStreamReferenceSets);
    const ReferenceSets refs = build_reference_sets(grid, cfg, refs_rng);
    const Embedder embedder(grid, refs, cfg);

    std::uint32_t complete = 0, exact = 0, blockwise_complete = 0;
    for (std::uint32_t q = 0; q < kQueries; ++q) {
      Rng rng = master.derive(kStreamQueryBase + q);
      const SimulatedQuery query = simulate_graph_query(embedder, cfg, kDrivers, rng, true);
      AttackState state(cfg);
      state.observe(query.transcript);
      if (state.recover().complete) ++blockwise_complete;
      const RecoveredLocations rec = refine_with_embedding(state, grid, refs, cfg);
      if (!rec.complete) continue;
      ++complete;
      bool match = rec.rider.has_value() && *rec.rider == query.rider_vec &&
                   rec.drivers.size() == kDrivers;
      for (std::uint32_t k = 0; k < kDrivers && match; ++k) {
        match = rec.drivers.at(k) == query.driver_vecs[k];
      }
      if (match) ++exact;
    }
    log << "l=" << l << ": complete " << complete << "/" << kQueries << ", bit-exact " << exact
        << "/" << kQueries << " (block-narrowing alone completed " << blockwise_complete << "); ";
    ok = ok && complete == kQueries && exact == kQueries;
  }
  return ok;
}

// --- 2: expected-drivers table -----------------------------------------------

bool criterion_drivers_table(std::ostringstream& log) {
  const std::uint64_t expected_ceil[] = {3, 9, 22, 55};
  const std::uint64_t kTrials = 100000;
  const Rng master(2026);
  bool ok = true;
  for (std::uint32_t l = 1; l <= 4; ++l) {
    const CouponStats stats =
        monte_carlo_drivers_needed(l, kTrials, master.derive(kStreamCouponBase + l), 2);
    const bool ceil_ok = stats.closed_form.ceil_value == expected_ceil[l - 1];
    const double rel = std::abs(stats.mc_mean - stats.closed_form.value) / stats.closed_form.value;
    const bool mc_ok = rel <= 0.02;
    log << "l=" << l << ": ceil=" << stats.closed_form.ceil_value << " ("
        << stats.closed_form.exact_num << "/" << stats.closed_form.exact_den
        << "), mc=" << stats.mc_mean << " rel.err=" << rel << "; ";
    ok = ok && ceil_ok && mc_ok;
  }
  return ok;
}

// --- 3: exhaustive block recovery --------------------------------------------

bool criterion_block_recovery(std::ostringstream& log) {
  Rng rng(31415);
  std::uint64_t cases = 0, good = 0;
  for (std::uint32_t l = 1; l <= 8; ++l) {
    const std::uint32_t n = 1u << l;
    for (std::uint32_t x = 0; x < n; ++x) {
      std::vector<std::int64_t> diffs;
      diffs.reserve(n);
      for (std::uint32_t z = 0; z < n; ++z) diffs.push_back(static_cast<std::int64_t>(z) - x);
      rng.shuffle(diffs);
      ++cases;
      try {
        if (recover_block_value(diffs, l) == x) ++good;
      } catch (const Error&) {
      }
    }
  }
  log << good << "/" << cases << " block values recovered";
  return cases == 510 && good == cases;
}

// --- 4: protocol correctness --------------------------------------------------

bool run_protocol_geometry_exhaustive(std::uint32_t l, std::uint32_t m) {
  EmbeddingConfig cfg;
  cfg.eta = 1;
  cfg.block_bits = l;
  cfg.num_blocks = m;
  const std::uint64_t bound = 1ULL << (l * m);
  std::vector<DriverResponse> responses;
  responses.reserve(bound);
  for (std::uint64_t y = 0; y < bound; ++y) {
    responses.push_back(
        driver_make_response(static_cast<std::uint32_t>(y), RneVector{{y}}, cfg));
  }
  Rng rng(l * 1000 + m);
  for (std::uint64_t x = 0; x < bound; ++x) {
    const RideRequest request = rider_make_request(RneVector{{x}}, cfg, rng);
    const auto [result, transcript] = sp_match(request, responses);
    for (std::uint64_t y = 0; y < bound; ++y) {
      const std::uint64_t expect = y > x ? y - x : x - y;
      if (transcript.per_driver[y].distance != expect) return false;
      if (result.distances.at(static_cast<std::uint32_t>(y)) != expect) return false;
    }
    if (result.winner != x) return false;  // the co-located driver always wins
  }
  return true;
}

bool criterion_protocol_correctness(std::ostringstream& log) {
  // Exhaustive tier: every geometry with l*m <= 12, all coordinate pairs,
  // through the full request/commit/resolve/assemble path.
  const auto geometries = geometries_up_to(12);
  std::vector<std::uint8_t> results(geometries.size(), 0);
  std::vector<std::thread> pool;
  const std::uint32_t workers = std::max(2u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  for (std::uint32_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t g = next.fetch_add(1); g < geometries.size(); g = next.fetch_add(1)) {
        results[g] = run_protocol_geometry_exhaustive(geometries[g].first, geometries[g].second);
      }
    });
  }
  for (std::thread& t : pool) t.join();
  std::uint64_t exhaustive_pairs = 0;
  bool ok = true;
  for (std::size_t g = 0; g < geometries.size(); ++g) {
    const std::uint64_t bound = 1ULL << (geometries[g].first * geometries[g].second);
    exhaustive_pairs += bound * bound;
    if (!results[g]) {
      log << "exhaustive geometry l=" << geometries[g].first << " m=" << geometries[g].second
          << " FAILED; ";
      ok = false;
    }
  }

  // Randomized tier: 10^4 (rider, driver) pairs spread over every supported
  // block width at full coordinate width.
  const std::pair<std::uint32_t, std::uint32_t> wide[] = {{1, 62}, {2, 31}, {3, 20}, {4, 15},
                                                          {5, 12}, {6, 10}, {7, 8},  {8, 7}};
  Rng rng(99991);
  std::uint64_t random_pairs = 0, random_good = 0;
  for (const auto& [l, m] : wide) {
    EmbeddingConfig cfg;
    cfg.eta = 4;
    cfg.block_bits = l;
    cfg.num_blocks = m;
    for (int round = 0; round < 250; ++round) {
      const SimulatedQuery q = simulate_uniform_query(cfg, 5, rng, false);
      for (std::size_t k = 0; k < q.driver_vecs.size(); ++k) {
        ++random_pairs;
        if (q.transcript.per_driver[k].distance == rne_distance(q.rider_vec, q.driver_vecs[k])) {
          ++random_good;
        }
      }
    }
  }
  log << exhaustive_pairs << " exhaustive pairs over " << geometries.size() << " geometries, "
      << random_good << "/" << random_pairs << " random pairs";
  return ok && random_pairs == 10000 && random_good == random_pairs;
}

// --- 5: codec identities --------------------------------------------------------

bool criterion_codec_identities(std::ostringstream& log) {
  bool ok = true;
  std::uint64_t checked = 0;
  for (const auto& [l, m] : geometries_up_to(12)) {
    const std::uint64_t bound = 1ULL << (l * m);
    std::vector<BlockVector> table;
    table.reserve(bound);
    for (std::uint64_t x = 0; x < bound; ++x) {
      table.push_back(decompose(x, l, m));
      if (recompose(table.back()) != x) {
        log << "round trip failed at x=" << x << " l=" << l << " m=" << m << "; ";
        ok = false;
      }
    }
    for (std::uint64_t rider = 0; rider < bound; ++rider) {
      for (std::uint64_t driver = 0; driver < bound; ++driver) {
        std::int64_t total = 0;
        for (std::uint32_t j = 0; j < m; ++j) {
          total +=
              signed_scaled_diff(table[driver].blocks[j], table[rider].blocks[j], j, l).value;
        }
        if (total != static_cast<std::int64_t>(driver) - static_cast<std::int64_t>(rider)) {
          log << "signed sum failed at (" << rider << "," << driver << ") l=" << l << " m=" << m
              << "; ";
          ok = false;
        }
        ++checked;
      }
    }
  }

  Rng rng(777);
  const std::pair<std::uint32_t, std::uint32_t> wide[] = {{1, 62}, {2, 31}, {4, 15}, {8, 7}};
  std::uint64_t random_checked = 0;
  for (const auto& [l, m] : wide) {
    const std::uint64_t bound = 1ULL << (l * m);
    for (int iter = 0; iter < 25000; ++iter) {
      const std::uint64_t x = rng.uniform(bound);
      const std::uint64_t y = rng.uniform(bound);
      if (recompose(decompose(x, l, m)) != x) ok = false;
      const BlockVector xb = decompose(x, l, m);
      const BlockVector yb = decompose(y, l, m);
      std::vector<ScaledDiff> diffs;
      diffs.reserve(m);
      for (std::uint32_t j = 0; j < m; ++j) {
        diffs.push_back(signed_scaled_diff(yb.blocks[j], xb.blocks[j], j, l));
      }
      if (sum_partial_diffs(diffs, l, m) !=
          static_cast<std::int64_t>(y) - static_cast<std::int64_t>(x)) {
        ok = false;
      }
      ++random_checked;
    }
  }
  log << checked << " exhaustive pairs, " << random_checked << " random samples";
  return ok && random_checked == 100000;
}

// --- 6: embedding Lipschitz bound ------------------------------------------------

bool criterion_lipschitz(std::ostringstream& log) {
  Rng graph_rng(2718281);
  std::vector<std::pair<std::string, RoadGraph>> graphs;
  graphs.emplace_back("grid10x10", RoadGraph::grid(10, 10));
  graphs.emplace_back("grid14x14", RoadGraph::grid(14, 14));
  graphs.emplace_back("random200", fixtures::random_connected_graph(200, 300, 9, graph_rng));

  bool ok = true;
  std::uint64_t checked = 0;
  for (const auto& [name, g] : graphs) {
    EmbeddingConfig cfg;
    cfg.eta = 8;
    cfg.block_bits = 4;
    cfg.num_blocks = 4;
    cfg.validate_for_graph(g);
    Rng refs_rng(4242);
    const ReferenceSets refs = build_reference_sets(g, cfg, refs_rng);
    const Embedder embedder(g, refs, cfg);
    const std::vector<RneVector> all = embedder.embed_all();
    for (NodeId u = 0; u < g.node_count(); ++u) {
      const std::vector<Dist> dist = g.distances_from(u);
      for (NodeId v = 0; v < g.node_count(); ++v) {
        for (std::uint32_t i = 0; i < cfg.eta; ++i) {
          const std::uint64_t a = all[u].coords[i], b = all[v].coords[i];
          if ((a > b ? a - b : b - a) > dist[v]) {
            log << name << ": coordinate " << i << " breaks the bound at (" << u << "," << v
                << "); ";
            ok = false;
          }
          ++checked;
        }
      }
    }
  }
  log << checked << " (node pair, coordinate) checks over " << graphs.size() << " graphs";
  return ok;
}

// --- 7: soundness under partial leakage --------------------------------------------

bool criterion_soundness(std::ostringstream& log) {
  const RoadGraph grid = RoadGraph::grid(10, 10);
  EmbeddingConfig cfg;
  cfg.eta = 8;
  cfg.block_bits = 2;
  cfg.num_blocks = 5;
  cfg.seed = 20250808;
  const Rng master(cfg.seed);
  Rng refs_rng = master.derive(kStreamReferenceSets);
  const ReferenceSets refs = build_reference_sets(grid, cfg, refs_rng);
  const Embedder embedder(grid, refs, cfg);

  const std::uint32_t kQueries = 125;
  const std::uint32_t kDrivers = 200;
  std::uint64_t observations = 0, violations = 0;
  for (std::uint32_t q = 0; q < kQueries; ++q) {
    Rng rng = master.derive(kStreamQueryBase + q);
    const SimulatedQuery query = simulate_graph_query(embedder, cfg, kDrivers, rng, true);
    std::vector<BlockVector> truth;
    truth.reserve(cfg.eta);
    for (std::uint32_t i = 0; i < cfg.eta; ++i) {
      truth.push_back(decompose(query.rider_vec.coords[i], cfg.block_bits, cfg.num_blocks));
    }
    AttackState state(cfg);
    for (const DriverLeak& leak : query.transcript.per_driver) {
      state.observe_driver(leak.driver_id, leak.scaled_diffs);
      for (std::uint32_t i = 0; i < cfg.eta; ++i) {
        for (std::uint32_t j = 0; j < cfg.num_blocks; ++j) {
          if (!state.cell(i, j).contains(truth[i].blocks[j])) ++violations;
        }
      }
    }
    observations += state.observation_count();
  }
  log << observations << " observations, " << violations << " violations";
  return observations >= 1000000 && violations == 0;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "full recovery of rider and driver encodings (10x10 grid, l in {1,2,4})",
       criterion_full_recovery},
      {2, "expected-drivers table: ceil{3,9,22,55} and monte carlo within 2%",
       criterion_drivers_table},
      {3, "exhaustive block recovery from complete difference sets (510 cases)",
       criterion_block_recovery},
      {4, "transcript distances equal direct encoding distances", criterion_protocol_correctness},
      {5, "codec round-trip and signed-sum identities", criterion_codec_identities},
      {6, "per-coordinate Lipschitz bound on graphs up to 200 nodes", criterion_lipschitz},
      {7, "true rider block inside every candidate interval (>= 1e6 observations)",
       criterion_soundness},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    std::ostringstream log;
    bool ok = false;
    try {
      ok = c.run(log);
    } catch (const std::exception& e) {
      log << "exception: " << e.what();
    }
    if (!ok) ++failures;
    std::printf("[%s] criterion %d: %s — %s\n", ok ? "PASS" : "FAIL", c.number, c.name.c_str(),
                log.str().c_str());
    std::fflush(stdout);
  }
  if (failures == 0) {
    std::printf("ACCEPTANCE: all %zu criteria passed\n", criteria.size());
  } else {
    std::printf("ACCEPTANCE: %d of %zu criteria FAILED\n", failures, criteria.size());
  }
  return failures == 0 ? 0 : 1;
}
