#include "orh/road_network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "orh/block_codec.hpp"
#include "orh/errors.hpp"

namespace orh {

RoadGraph::RoadGraph(std::uint32_t node_count, const std::vector<GraphEdge>& edges)
    : node_count_(node_count) {
  if (node_count == 0) {
    fail(Errc::invalid_config, "graph needs at least one node");
  }
  for (const GraphEdge& e : edges) {
    if (e.a >= node_count || e.b >= node_count) {
      fail(Errc::invalid_node_id, "edge endpoint " + std::to_string(std::max(e.a, e.b)) +
                                      " outside [0, " + std::to_string(node_count) + ")");
    }
    if (e.a == e.b) {
      fail(Errc::invalid_node_id, "self-loop at node " + std::to_string(e.a));
    }
    if (e.weight < 0) {
      fail(Errc::negative_weight, "edge (" + std::to_string(e.a) + ", " + std::to_string(e.b) +
                                      ") has negative weight " + std::to_string(e.weight));
    }
  }

  // CSR adjacency, both directions.
  std::vector<std::uint32_t> degree(node_count, 0);
  for (const GraphEdge& e : edges) {
    ++degree[e.a];
    ++degree[e.b];
  }
  offsets_.assign(node_count + 1, 0);
  for (std::uint32_t v = 0; v < node_count; ++v) offsets_[v + 1] = offsets_[v] + degree[v];
  adj_.resize(offsets_[node_count]);
  std::vector<std::uint32_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const GraphEdge& e : edges) {
    const std::uint64_t w = static_cast<std::uint64_t>(e.weight);
    adj_[cursor[e.a]++] = {e.b, w};
    adj_[cursor[e.b]++] = {e.a, w};
  }

  // Connectivity check from node 0.
  std::vector<bool> seen(node_count, false);
  std::vector<NodeId> stack{0};
  seen[0] = true;
  std::uint32_t reached = 1;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    for (std::uint32_t i = offsets_[v]; i < offsets_[v + 1]; ++i) {
      const NodeId to = adj_[i].first;
      if (!seen[to]) {
        seen[to] = true;
        ++reached;
        stack.push_back(to);
      }
    }
  }
  if (reached != node_count) {
    fail(Errc::disconnected_graph, std::to_string(node_count - reached) +
                                       " of " + std::to_string(node_count) +
                                       " nodes unreachable from node 0");
  }
}

RoadGraph RoadGraph::grid(std::uint32_t width, std::uint32_t height) {
  if (width == 0 || height == 0) {
    fail(Errc::invalid_config, "grid dimensions must be positive");
  }
  if (static_cast<std::uint64_t>(width) * height > 0xffffffffULL) {
    fail(Errc::invalid_config, "grid has too many nodes");
  }
  std::vector<GraphEdge> edges;
  edges.reserve(static_cast<std::size_t>(width) * height * 2);
  for (std::uint32_t row = 0; row < height; ++row) {
    for (std::uint32_t col = 0; col < width; ++col) {
      const NodeId id = row * width + col;
      if (col + 1 < width) edges.push_back({id, id + 1, 1});
      if (row + 1 < height) edges.push_back({id, id + width, 1});
    }
  }
  return RoadGraph(width * height, edges);
}

RoadGraph RoadGraph::load(std::istream& in) {
  std::string line;
  bool have_header = false;
  std::uint64_t node_count = 0;
  std::vector<GraphEdge> edges;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;  // blank or comment-only
    if (!have_header) {
      if (first != "nodes" || !(fields >> node_count) || node_count == 0 ||
          node_count > 0xffffffffULL) {
        fail(Errc::parse_error, "line " + std::to_string(line_no) +
                                    ": expected header `nodes N` before edges");
      }
      have_header = true;
      continue;
    }
    GraphEdge e;
    std::int64_t a = 0, b = 0;
    std::istringstream triple(line);
    if (!(triple >> a >> b >> e.weight) || a < 0 || b < 0) {
      fail(Errc::parse_error, "line " + std::to_string(line_no) + ": expected `u v w` triple");
    }
    e.a = static_cast<NodeId>(a);
    e.b = static_cast<NodeId>(b);
    if (static_cast<std::uint64_t>(a) >= node_count || static_cast<std::uint64_t>(b) >= node_count) {
      fail(Errc::invalid_node_id,
           "line " + std::to_string(line_no) + ": node id outside declared range");
    }
    edges.push_back(e);
  }
  if (!have_header) {
    fail(Errc::parse_error, "missing `nodes N` header");
  }
  return RoadGraph(static_cast<std::uint32_t>(node_count), edges);
}

RoadGraph RoadGraph::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(Errc::io_error, "cannot open graph file: " + path);
  }
  return load(in);
}

void RoadGraph::check_node(NodeId id) const {
  if (id >= node_count_) {
    fail(Errc::invalid_node_id,
         "node " + std::to_string(id) + " outside [0, " + std::to_string(node_count_) + ")");
  }
}

namespace {

// Min-heap Dijkstra over the CSR adjacency shared by the distance queries.
void dijkstra(const std::vector<std::uint32_t>& offsets,
              const std::vector<std::pair<NodeId, std::uint64_t>>& adj,
              const std::vector<NodeId>& sources, std::vector<Dist>& dist,
              NodeId stop_at = ~NodeId{0}) {
  using Item = std::pair<Dist, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (const NodeId s : sources) {
    dist[s] = 0;
    queue.emplace(0, s);
  }
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d != dist[v]) continue;  // stale entry
    if (v == stop_at) return;
    for (std::uint32_t i = offsets[v]; i < offsets[v + 1]; ++i) {
      const auto [to, w] = adj[i];
      const Dist nd = d + w;
      if (nd < dist[to]) {
        dist[to] = nd;
        queue.emplace(nd, to);
      }
    }
  }
}

}  // namespace

Dist RoadGraph::shortest_path_dist(NodeId u, NodeId v) const {
  check_node(u);
  check_node(v);
  if (u == v) return 0;
  std::vector<Dist> dist(node_count_, kInfiniteDist);
  dijkstra(offsets_, adj_, {u}, dist, v);
  return dist[v];
}

std::vector<Dist> RoadGraph::distances_from(NodeId source) const {
  check_node(source);
  std::vector<Dist> dist(node_count_, kInfiniteDist);
  dijkstra(offsets_, adj_, {source}, dist);
  return dist;
}

std::vector<Dist> RoadGraph::distances_from_set(const std::vector<NodeId>& sources) const {
  if (sources.empty()) {
    fail(Errc::invalid_config, "distances_from_set needs at least one source");
  }
  for (const NodeId s : sources) check_node(s);
  std::vector<Dist> dist(node_count_, kInfiniteDist);
  dijkstra(offsets_, adj_, sources, dist);
  return dist;
}

Dist RoadGraph::diameter() const {
  Dist best = 0;
  for (NodeId u = 0; u < node_count_; ++u) {
    const std::vector<Dist> dist = distances_from(u);
    for (const Dist d : dist) best = std::max(best, d);
  }
  return best;
}

std::uint64_t EmbeddingConfig::coord_bound() const {
  return 1ULL << (static_cast<std::uint64_t>(block_bits) * num_blocks);
}

void EmbeddingConfig::validate() const {
  if (eta == 0) {
    fail(Errc::invalid_config, "eta must be positive");
  }
  check_block_geometry(block_bits, num_blocks);
}

void EmbeddingConfig::validate_for_graph(const RoadGraph& g) const {
  validate();
  const Dist diam = g.diameter();
  if (diam >= coord_bound()) {
    fail(Errc::invalid_config, "coordinate range 2^(l*m) = " + std::to_string(coord_bound()) +
                                   " must exceed the graph diameter " + std::to_string(diam));
  }
}

void ReferenceSets::validate(const RoadGraph& g, const EmbeddingConfig& cfg) const {
  if (eta() != cfg.eta) {
    fail(Errc::config_mismatch, "reference sets hold " + std::to_string(eta()) +
                                    " sets, config expects " + std::to_string(cfg.eta));
  }
  for (const auto& set : sets) {
    if (set.empty()) {
      fail(Errc::invalid_config, "reference set must not be empty");
    }
    for (const NodeId r : set) {
      if (r >= g.node_count()) {
        fail(Errc::invalid_node_id, "reference node " + std::to_string(r) + " not in graph");
      }
    }
  }
}

ReferenceSets build_reference_sets(const RoadGraph& g, const EmbeddingConfig& cfg, Rng& rng) {
  cfg.validate();
  std::uint32_t size = cfg.ref_set_size;
  if (size == 0) {
    size = static_cast<std::uint32_t>(
        std::max(1.0, std::ceil(std::log2(static_cast<double>(g.node_count())))));
  }
  if (size > g.node_count()) {
    fail(Errc::eta_exceeds_budget, "reference set size " + std::to_string(size) +
                                       " exceeds node count " + std::to_string(g.node_count()));
  }
  ReferenceSets refs;
  refs.sets.reserve(cfg.eta);
  for (std::uint32_t i = 0; i < cfg.eta; ++i) {
    std::vector<NodeId> set = rng.sample_without_replacement(g.node_count(), size);
    std::sort(set.begin(), set.end());
    refs.sets.push_back(std::move(set));
  }
  return refs;
}

namespace {

std::uint64_t coord_from_dists(const std::vector<Dist>& dist, const std::vector<NodeId>& set) {
  Dist best = kInfiniteDist;
  for (const NodeId r : set) best = std::min(best, dist[r]);
  return best;
}

void check_coord_bound(std::uint64_t coord, const EmbeddingConfig& cfg, std::uint32_t i) {
  if (coord >= cfg.coord_bound()) {
    fail(Errc::coordinate_overflow, "coordinate " + std::to_string(i) + " = " +
                                        std::to_string(coord) + " does not fit in " +
                                        std::to_string(cfg.block_bits * cfg.num_blocks) + " bits");
  }
}

}  // namespace

RneVector embed(const RoadGraph& g, const ReferenceSets& refs, const EmbeddingConfig& cfg,
                NodeId u) {
  refs.validate(g, cfg);
  const std::vector<Dist> dist = g.distances_from(u);
  RneVector out;
  out.coords.reserve(refs.eta());
  for (std::uint32_t i = 0; i < refs.eta(); ++i) {
    const std::uint64_t coord = coord_from_dists(dist, refs.sets[i]);
    check_coord_bound(coord, cfg, i);
    out.coords.push_back(coord);
  }
  return out;
}

std::uint64_t rne_distance(const RneVector& a, const RneVector& b) {
  if (a.size() != b.size()) {
    fail(Errc::dimension_mismatch, "vectors of length " + std::to_string(a.size()) + " and " +
                                       std::to_string(b.size()));
  }
  std::uint64_t best = 0;
  for (std::uint32_t i = 0; i < a.size(); ++i) {
    const std::uint64_t x = a.coords[i], y = b.coords[i];
    best = std::max(best, x > y ? x - y : y - x);
  }
  return best;
}

Embedder::Embedder(const RoadGraph& g, const ReferenceSets& refs, const EmbeddingConfig& cfg)
    : cfg_(cfg), node_count_(g.node_count()) {
  refs.validate(g, cfg);
  set_dist_.reserve(refs.eta());
  for (const auto& set : refs.sets) {
    set_dist_.push_back(g.distances_from_set(set));
  }
}

RneVector Embedder::embed(NodeId u) const {
  if (u >= node_count_) {
    fail(Errc::invalid_node_id, "node " + std::to_string(u) + " not in graph");
  }
  RneVector out;
  out.coords.reserve(set_dist_.size());
  for (std::uint32_t i = 0; i < set_dist_.size(); ++i) {
    const std::uint64_t coord = set_dist_[i][u];
    check_coord_bound(coord, cfg_, i);
    out.coords.push_back(coord);
  }
  return out;
}

std::vector<RneVector> Embedder::embed_all() const {
  std::vector<RneVector> out;
  out.reserve(node_count_);
  for (NodeId u = 0; u < node_count_; ++u) out.push_back(embed(u));
  return out;
}

std::string reference_sets_to_json(const ReferenceSets& refs, const EmbeddingConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["config"] = {{"eta", cfg.eta},
                   {"l", cfg.block_bits},
                   {"m", cfg.num_blocks},
                   {"seed", cfg.seed},
                   {"ref_set_size", cfg.ref_set_size}};
  doc["sets"] = refs.sets;
  return doc.dump(2) + "\n";
}

std::pair<ReferenceSets, EmbeddingConfig> reference_sets_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
    EmbeddingConfig cfg;
    cfg.eta = doc.at("config").at("eta").get<std::uint32_t>();
    cfg.block_bits = doc.at("config").at("l").get<std::uint32_t>();
    cfg.num_blocks = doc.at("config").at("m").get<std::uint32_t>();
    cfg.seed = doc.at("config").value("seed", std::uint64_t{0});
    cfg.ref_set_size = doc.at("config").value("ref_set_size", std::uint32_t{0});
    ReferenceSets refs;
    refs.sets = doc.at("sets").get<std::vector<std::vector<NodeId>>>();
    return {std::move(refs), cfg};
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, std::string("bad reference-set json: ") + e.what());
  }
}

}  // namespace orh
