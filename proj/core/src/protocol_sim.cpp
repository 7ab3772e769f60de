#include "orh/protocol_sim.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <string>

#include <json.hpp>

#include "orh/errors.hpp"

namespace orh {

namespace {

void check_vector_against_config(const RneVector& vec, const EmbeddingConfig& cfg,
                                 const char* who) {
  cfg.validate();
  if (vec.size() != cfg.eta) {
    fail(Errc::config_mismatch, std::string(who) + " vector has " + std::to_string(vec.size()) +
                                    " coordinates, config expects " + std::to_string(cfg.eta));
  }
  for (std::uint32_t i = 0; i < vec.size(); ++i) {
    if (vec.coords[i] >= cfg.coord_bound()) {
      fail(Errc::config_mismatch, std::string(who) + " coordinate " + std::to_string(i) +
                                      " does not fit in l*m bits");
    }
  }
}

}  // namespace

RideRequest rider_make_request(const RneVector& rider_vec, const EmbeddingConfig& cfg, Rng& rng) {
  check_vector_against_config(rider_vec, cfg, "rider");
  const std::uint32_t guesses = 1u << cfg.block_bits;
  RideRequest req;
  req.eta = cfg.eta;
  req.block_bits = cfg.block_bits;
  req.num_blocks = cfg.num_blocks;
  req.tokens.resize(cfg.eta);
  for (std::uint32_t i = 0; i < cfg.eta; ++i) {
    const BlockVector rider_blocks = decompose(rider_vec.coords[i], cfg.block_bits, cfg.num_blocks);
    req.tokens[i].resize(cfg.num_blocks);
    for (std::uint32_t j = 0; j < cfg.num_blocks; ++j) {
      auto& slot_list = req.tokens[i][j];
      slot_list.reserve(guesses);
      for (std::uint32_t z = 0; z < guesses; ++z) {
        slot_list.push_back(
            GuessToken{z, signed_scaled_diff(z, rider_blocks.blocks[j], j, cfg.block_bits).value});
      }
      rng.shuffle(slot_list);
    }
  }
  return req;
}

DriverResponse driver_make_response(std::uint32_t driver_id, const RneVector& driver_vec,
                                    const EmbeddingConfig& cfg) {
  check_vector_against_config(driver_vec, cfg, "driver");
  DriverResponse resp;
  resp.driver_id = driver_id;
  resp.eta = cfg.eta;
  resp.block_bits = cfg.block_bits;
  resp.num_blocks = cfg.num_blocks;
  resp.commitments.resize(cfg.eta);
  for (std::uint32_t i = 0; i < cfg.eta; ++i) {
    const BlockVector blocks = decompose(driver_vec.coords[i], cfg.block_bits, cfg.num_blocks);
    resp.commitments[i].resize(cfg.num_blocks);
    for (std::uint32_t j = 0; j < cfg.num_blocks; ++j) {
      resp.commitments[i][j].value = blocks.blocks[j];
    }
  }
  return resp;
}

ScaledDiff sp_resolve_block_diff(const RideRequest& request, const DriverResponse& response,
                                 std::uint32_t coordinate, std::uint32_t block) {
  if (request.eta != response.eta || request.block_bits != response.block_bits ||
      request.num_blocks != response.num_blocks) {
    fail(Errc::config_mismatch, "request and response disagree on (eta, l, m)");
  }
  if (coordinate >= request.eta || block >= request.num_blocks) {
    fail(Errc::config_mismatch, "coordinate/block index outside the request shape");
  }
  const std::uint32_t committed = response.commitments[coordinate][block].value;
  for (const GuessToken& token : request.tokens[coordinate][block]) {
    if (token.guess == committed) {
      // The equality check matched: the masked value opens to the server.
      return ScaledDiff{block, token.masked_value};
    }
  }
  fail(Errc::no_match, "no token matched block (" + std::to_string(coordinate) + ", " +
                           std::to_string(block) + "); corrupt request or response");
}

std::pair<MatchResult, MatchTranscript> sp_match(const RideRequest& request,
                                                 const std::vector<DriverResponse>& responses) {
  if (responses.empty()) {
    fail(Errc::empty_response_set, "a matching round needs at least one driver response");
  }
  std::set<std::uint32_t> ids;
  for (const DriverResponse& r : responses) {
    if (!ids.insert(r.driver_id).second) {
      fail(Errc::config_mismatch, "duplicate driver id " + std::to_string(r.driver_id));
    }
  }

  MatchTranscript transcript;
  transcript.eta = request.eta;
  transcript.block_bits = request.block_bits;
  transcript.num_blocks = request.num_blocks;
  transcript.per_driver.reserve(responses.size());

  MatchResult result;
  bool have_winner = false;
  std::uint64_t best_distance = 0;

  for (const DriverResponse& resp : responses) {
    DriverLeak leak;
    leak.driver_id = resp.driver_id;
    leak.scaled_diffs.resize(request.eta);
    leak.coord_diffs.resize(request.eta);
    std::uint64_t distance = 0;
    for (std::uint32_t i = 0; i < request.eta; ++i) {
      leak.scaled_diffs[i].resize(request.num_blocks);
      std::int64_t coord_diff = 0;
      for (std::uint32_t j = 0; j < request.num_blocks; ++j) {
        const ScaledDiff diff = sp_resolve_block_diff(request, resp, i, j);
        leak.scaled_diffs[i][j] = diff.value;
        coord_diff += diff.value;
      }
      leak.coord_diffs[i] = coord_diff;
      distance = std::max(distance, static_cast<std::uint64_t>(std::llabs(coord_diff)));
    }
    leak.distance = distance;
    result.distances[resp.driver_id] = distance;
    if (!have_winner || distance < best_distance ||
        (distance == best_distance && resp.driver_id < result.winner)) {
      have_winner = true;
      best_distance = distance;
      result.winner = resp.driver_id;
    }
    transcript.per_driver.push_back(std::move(leak));
  }
  transcript.winner = result.winner;
  return {std::move(result), std::move(transcript)};
}

namespace {

nlohmann::ordered_json hidden_to_json(const HiddenLocation& h) {
  nlohmann::ordered_json out;
  if (h.node.has_value()) {
    out["node"] = *h.node;
  } else {
    out["node"] = nullptr;
  }
  out["coords"] = h.vec.coords;
  return out;
}

HiddenLocation hidden_from_json(const nlohmann::json& doc) {
  HiddenLocation h;
  if (doc.contains("node") && !doc.at("node").is_null()) {
    h.node = doc.at("node").get<NodeId>();
  }
  h.vec.coords = doc.at("coords").get<std::vector<std::uint64_t>>();
  return h;
}

}  // namespace

std::string transcript_to_json(const MatchTranscript& t) {
  nlohmann::ordered_json doc;
  doc["config"] = {{"eta", t.eta}, {"l", t.block_bits}, {"m", t.num_blocks}};
  if (t.rider_truth.has_value()) {
    doc["rider_hidden"] = hidden_to_json(*t.rider_truth);
    nlohmann::ordered_json drivers = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < t.driver_truth.size(); ++k) {
      nlohmann::ordered_json item = hidden_to_json(t.driver_truth[k]);
      item["driver_id"] = t.per_driver[k].driver_id;
      drivers.push_back(std::move(item));
    }
    doc["drivers_hidden"] = std::move(drivers);
  }
  nlohmann::ordered_json per_driver = nlohmann::ordered_json::array();
  for (const DriverLeak& leak : t.per_driver) {
    nlohmann::ordered_json diffs = nlohmann::ordered_json::array();
    for (std::uint32_t i = 0; i < leak.scaled_diffs.size(); ++i) {
      for (std::uint32_t j = 0; j < leak.scaled_diffs[i].size(); ++j) {
        diffs.push_back({i, j, leak.scaled_diffs[i][j]});
      }
    }
    per_driver.push_back({{"driver_id", leak.driver_id},
                          {"diffs", std::move(diffs)},
                          {"distance", leak.distance}});
  }
  doc["per_driver"] = std::move(per_driver);
  doc["winner"] = t.winner;
  return doc.dump(2) + "\n";
}

MatchTranscript transcript_from_json(const std::string& text) {
  try {
    const nlohmann::json doc = nlohmann::json::parse(text);
    MatchTranscript t;
    t.eta = doc.at("config").at("eta").get<std::uint32_t>();
    t.block_bits = doc.at("config").at("l").get<std::uint32_t>();
    t.num_blocks = doc.at("config").at("m").get<std::uint32_t>();
    EmbeddingConfig shape;
    shape.eta = t.eta;
    shape.block_bits = t.block_bits;
    shape.num_blocks = t.num_blocks;
    shape.validate();

    for (const auto& entry : doc.at("per_driver")) {
      DriverLeak leak;
      leak.driver_id = entry.at("driver_id").get<std::uint32_t>();
      leak.scaled_diffs.assign(t.eta, std::vector<std::int64_t>(t.num_blocks, 0));
      std::vector<std::vector<bool>> seen(t.eta, std::vector<bool>(t.num_blocks, false));
      for (const auto& triple : entry.at("diffs")) {
        const std::uint32_t i = triple.at(0).get<std::uint32_t>();
        const std::uint32_t j = triple.at(1).get<std::uint32_t>();
        if (i >= t.eta || j >= t.num_blocks) {
          fail(Errc::parse_error, "diff index outside the transcript shape");
        }
        if (seen[i][j]) {
          fail(Errc::duplicate_block, "duplicate diff for coordinate " + std::to_string(i) +
                                          " block " + std::to_string(j));
        }
        seen[i][j] = true;
        leak.scaled_diffs[i][j] = triple.at(2).get<std::int64_t>();
      }
      for (std::uint32_t i = 0; i < t.eta; ++i) {
        std::int64_t coord_diff = 0;
        for (std::uint32_t j = 0; j < t.num_blocks; ++j) {
          if (!seen[i][j]) {
            fail(Errc::missing_block, "missing diff for coordinate " + std::to_string(i) +
                                          " block " + std::to_string(j));
          }
          coord_diff += leak.scaled_diffs[i][j];
        }
        leak.coord_diffs.push_back(coord_diff);
      }
      leak.distance = entry.at("distance").get<std::uint64_t>();
      t.per_driver.push_back(std::move(leak));
    }
    t.winner = doc.at("winner").get<std::uint32_t>();
    if (doc.contains("rider_hidden")) {
      t.rider_truth = hidden_from_json(doc.at("rider_hidden"));
      if (doc.contains("drivers_hidden")) {
        for (const auto& entry : doc.at("drivers_hidden")) {
          t.driver_truth.push_back(hidden_from_json(entry));
        }
        if (t.driver_truth.size() != t.per_driver.size()) {
          fail(Errc::parse_error, "drivers_hidden length disagrees with per_driver");
        }
      }
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, std::string("bad transcript json: ") + e.what());
  }
}

}  // namespace orh
