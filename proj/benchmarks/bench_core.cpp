#include <benchmark/benchmark.h>

#include "orh/attack.hpp"
#include "orh/coupon_analysis.hpp"
#include "orh/experiment.hpp"
#include "orh/road_network.hpp"

using namespace orh;

namespace {

EmbeddingConfig bench_config(std::uint32_t l) {
  EmbeddingConfig cfg;
  cfg.eta = 8;
  cfg.block_bits = l;
  cfg.num_blocks = 5;
  cfg.seed = 42;
  return cfg;
}

void BM_shortest_path(benchmark::State& state) {
  const auto side = static_cast<std::uint32_t>(state.range(0));
  const RoadGraph grid = RoadGraph::grid(side, side);
  NodeId v = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(grid.shortest_path_dist(0, v));
    v = (v + 17) % grid.node_count();
  }
}
BENCHMARK(BM_shortest_path)->Arg(10)->Arg(32)->Arg(100);

void BM_embed_all(benchmark::State& state) {
  const auto side = static_cast<std::uint32_t>(state.range(0));
  const RoadGraph grid = RoadGraph::grid(side, side);
  EmbeddingConfig cfg = bench_config(4);
  cfg.num_blocks = 5;
  Rng rng(1);
  const ReferenceSets refs = build_reference_sets(grid, cfg, rng);
  for (auto _ : state) {
    const Embedder embedder(grid, refs, cfg);
    benchmark::DoNotOptimize(embedder.embed_all());
  }
  state.SetItemsProcessed(state.iterations() * grid.node_count());
}
BENCHMARK(BM_embed_all)->Arg(10)->Arg(32);

void BM_match_round(benchmark::State& state) {
  const EmbeddingConfig cfg = bench_config(static_cast<std::uint32_t>(state.range(0)));
  Rng rng(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_uniform_query(cfg, 30, rng, false));
  }
  state.SetItemsProcessed(state.iterations() * 30);
}
BENCHMARK(BM_match_round)->Arg(1)->Arg(2)->Arg(4);

void BM_attack_observe(benchmark::State& state) {
  const EmbeddingConfig cfg = bench_config(static_cast<std::uint32_t>(state.range(0)));
  Rng rng(7);
  const SimulatedQuery query = simulate_uniform_query(cfg, 200, rng, false);
  for (auto _ : state) {
    AttackState attack(cfg);
    attack.observe(query.transcript);
    benchmark::DoNotOptimize(attack.recover());
  }
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_attack_observe)->Arg(1)->Arg(2)->Arg(4);

void BM_refine_with_embedding(benchmark::State& state) {
  const RoadGraph grid = RoadGraph::grid(10, 10);
  const EmbeddingConfig cfg = bench_config(static_cast<std::uint32_t>(state.range(0)));
  const Rng master(cfg.seed);
  Rng refs_rng = master.derive(kStreamReferenceSets);
  const ReferenceSets refs = build_reference_sets(grid, cfg, refs_rng);
  const Embedder embedder(grid, refs, cfg);
  Rng rng = master.derive(kStreamQueryBase);
  const SimulatedQuery query = simulate_graph_query(embedder, cfg, 200, rng, false);
  AttackState attack(cfg);
  attack.observe(query.transcript);
  for (auto _ : state) {
    benchmark::DoNotOptimize(refine_with_embedding(attack, grid, refs, cfg));
  }
}
BENCHMARK(BM_refine_with_embedding)->Arg(2)->Arg(4);

void BM_coupon_trials(benchmark::State& state) {
  const auto l = static_cast<std::uint32_t>(state.range(0));
  const Rng master(99);
  for (auto _ : state) {
    benchmark::DoNotOptimize(monte_carlo_drivers_needed(l, 1000, master));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_coupon_trials)->Arg(1)->Arg(4)->Arg(8);

void BM_block_recovery(benchmark::State& state) {
  const auto l = static_cast<std::uint32_t>(state.range(0));
  const std::uint32_t n = 1u << l;
  std::vector<std::int64_t> diffs;
  for (std::uint32_t z = 0; z < n; ++z) diffs.push_back(static_cast<std::int64_t>(z) - 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(recover_block_value(diffs, l));
  }
}
BENCHMARK(BM_block_recovery)->Arg(2)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
