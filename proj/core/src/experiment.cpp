#include "orh/experiment.hpp"

#include "orh/errors.hpp"

namespace orh {

namespace {

SimulatedQuery run_round(const RneVector& rider_vec, std::vector<RneVector> driver_vecs,
                         const EmbeddingConfig& cfg, Rng& rng, bool attach_truth) {
  const RideRequest request = rider_make_request(rider_vec, cfg, rng);
  std::vector<DriverResponse> responses;
  responses.reserve(driver_vecs.size());
  for (std::uint32_t k = 0; k < driver_vecs.size(); ++k) {
    responses.push_back(driver_make_response(k, driver_vecs[k], cfg));
  }
  auto [result, transcript] = sp_match(request, responses);

  SimulatedQuery query;
  query.rider_vec = rider_vec;
  query.driver_vecs = std::move(driver_vecs);
  if (attach_truth) {
    transcript.rider_truth = HiddenLocation{std::nullopt, query.rider_vec};
    transcript.driver_truth.reserve(query.driver_vecs.size());
    for (const RneVector& vec : query.driver_vecs) {
      transcript.driver_truth.push_back(HiddenLocation{std::nullopt, vec});
    }
  }
  query.result = std::move(result);
  query.transcript = std::move(transcript);
  return query;
}

}  // namespace

SimulatedQuery simulate_graph_query(const Embedder& embedder, const EmbeddingConfig& cfg,
                                    std::uint32_t driver_count, Rng& rng, bool attach_truth) {
  if (driver_count == 0) {
    fail(Errc::invalid_config, "a query needs at least one driver");
  }
  const auto rider_node = static_cast<NodeId>(rng.uniform(embedder.node_count()));
  std::vector<NodeId> driver_nodes;
  driver_nodes.reserve(driver_count);
  for (std::uint32_t k = 0; k < driver_count; ++k) {
    driver_nodes.push_back(static_cast<NodeId>(rng.uniform(embedder.node_count())));
  }

  std::vector<RneVector> driver_vecs;
  driver_vecs.reserve(driver_count);
  for (const NodeId node : driver_nodes) driver_vecs.push_back(embedder.embed(node));

  SimulatedQuery query =
      run_round(embedder.embed(rider_node), std::move(driver_vecs), cfg, rng, attach_truth);
  query.rider_node = rider_node;
  query.driver_nodes = std::move(driver_nodes);
  if (attach_truth) {
    query.transcript.rider_truth->node = rider_node;
    for (std::uint32_t k = 0; k < driver_count; ++k) {
      query.transcript.driver_truth[k].node = query.driver_nodes[k];
    }
  }
  return query;
}

SimulatedQuery simulate_uniform_query(const EmbeddingConfig& cfg, std::uint32_t driver_count,
                                      Rng& rng, bool attach_truth) {
  if (driver_count == 0) {
    fail(Errc::invalid_config, "a query needs at least one driver");
  }
  cfg.validate();
  const std::uint64_t bound = cfg.coord_bound();
  const auto draw_vector = [&rng, bound, &cfg] {
    RneVector vec;
    vec.coords.reserve(cfg.eta);
    for (std::uint32_t i = 0; i < cfg.eta; ++i) vec.coords.push_back(rng.uniform(bound));
    return vec;
  };
  const RneVector rider_vec = draw_vector();
  std::vector<RneVector> driver_vecs;
  driver_vecs.reserve(driver_count);
  for (std::uint32_t k = 0; k < driver_count; ++k) driver_vecs.push_back(draw_vector());
  return run_round(rider_vec, std::move(driver_vecs), cfg, rng, attach_truth);
}

}  // namespace orh
