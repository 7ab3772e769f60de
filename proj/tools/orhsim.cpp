// orhsim: seeded experiments around a block-leaking proximity-matching
// protocol. Subcommands: simulate (ride-request rounds against placed or
// synthetic drivers), attack (passive reconstruction from transcripts),
// coupon (drivers-needed analysis), lemma-check (exhaustive block-recovery
// verification).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "orh/attack.hpp"
#include "orh/coupon_analysis.hpp"
#include "orh/errors.hpp"
#include "orh/experiment.hpp"
#include "orh/protocol_sim.hpp"
#include "orh/road_network.hpp"

namespace fs = std::filesystem;
using namespace orh;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPropertyViolation = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitInconsistent = 4;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::parse_error:
    case Errc::io_error:
      return kExitIo;
    case Errc::inconsistent_observation:
    case Errc::no_match:
    case Errc::malformed_difference_set:
    case Errc::missing_block:
    case Errc::duplicate_block:
      return kExitInconsistent;
    default:
      return kExitConfig;
  }
}

struct GridSpec {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
};

GridSpec parse_grid(const std::string& text) {
  const auto sep = text.find_first_of("xX");
  GridSpec spec;
  try {
    if (sep == std::string::npos) throw std::invalid_argument("no separator");
    std::size_t used = 0;
    const long w = std::stol(text.substr(0, sep), &used);
    if (used != sep) throw std::invalid_argument("trailing characters");
    const std::string rest = text.substr(sep + 1);
    const long h = std::stol(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("trailing characters");
    if (w <= 0 || h <= 0) throw std::invalid_argument("non-positive");
    spec.width = static_cast<std::uint32_t>(w);
    spec.height = static_cast<std::uint32_t>(h);
  } catch (const std::exception&) {
    fail(Errc::invalid_config, "--grid expects WxH with positive integers, got '" + text + "'");
  }
  return spec;
}

std::pair<std::uint32_t, std::uint32_t> parse_range(const std::string& text) {
  try {
    const auto sep = text.find("..");
    if (sep == std::string::npos) {
      const long v = std::stol(text);
      if (v <= 0) throw std::invalid_argument("non-positive");
      return {static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v)};
    }
    const long a = std::stol(text.substr(0, sep));
    const long b = std::stol(text.substr(sep + 2));
    if (a <= 0 || b < a) throw std::invalid_argument("bad order");
    return {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  } catch (const std::exception&) {
    fail(Errc::invalid_config, "--l-range expects A..B or A, got '" + text + "'");
  }
}

// Options shared by subcommands that build a graph.
struct GraphOptions {
  std::string grid;
  std::string graph_file;

  void attach(CLI::App& cmd) {
    auto* grid_opt = cmd.add_option("--grid", grid, "grid graph WxH with unit weights");
    auto* file_opt = cmd.add_option("--graph", graph_file, "edge-list graph file");
    grid_opt->excludes(file_opt);
  }

  bool configured() const { return !grid.empty() || !graph_file.empty(); }

  RoadGraph build() const {
    if (!grid.empty()) {
      const GridSpec spec = parse_grid(grid);
      return RoadGraph::grid(spec.width, spec.height);
    }
    if (!graph_file.empty()) {
      return RoadGraph::load_file(graph_file);
    }
    fail(Errc::invalid_config, "a graph source is required: pass --grid WxH or --graph FILE");
  }
};

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(Errc::io_error, "cannot open for writing: " + path.string());
  }
  out << text;
  if (!out) {
    fail(Errc::io_error, "short write: " + path.string());
  }
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(Errc::io_error, "cannot open: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string transcript_name(std::uint32_t query_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "transcript_%05u.json", query_index + 1);
  return buf;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  GraphOptions graph;
  EmbeddingConfig cfg;
  std::uint32_t drivers = 30;
  std::uint32_t queries = 1;
  std::string out_dir;
  bool reveal_truth = false;
  bool uniform_vectors = false;
};

int run_simulate(const SimulateOptions& opt) {
  if (opt.drivers == 0) {
    fail(Errc::invalid_config, "--drivers must be at least 1");
  }
  if (opt.queries == 0) {
    fail(Errc::invalid_config, "--queries must be at least 1");
  }
  opt.cfg.validate();
  if (!opt.uniform_vectors && !opt.graph.configured()) {
    fail(Errc::invalid_config, "simulate needs --grid/--graph, or --uniform-vectors");
  }

  std::error_code ec;
  fs::create_directories(opt.out_dir, ec);
  if (ec) {
    fail(Errc::io_error, "cannot create output directory: " + opt.out_dir);
  }

  const Rng master(opt.cfg.seed);
  std::optional<RoadGraph> graph;
  std::optional<Embedder> embedder;
  if (!opt.uniform_vectors) {
    graph.emplace(opt.graph.build());
    opt.cfg.validate_for_graph(*graph);
    Rng refs_rng = master.derive(kStreamReferenceSets);
    const ReferenceSets refs = build_reference_sets(*graph, opt.cfg, refs_rng);
    embedder.emplace(*graph, refs, opt.cfg);
    write_text_file(fs::path(opt.out_dir) / "refs.json", reference_sets_to_json(refs, opt.cfg));
  }

  for (std::uint32_t q = 0; q < opt.queries; ++q) {
    Rng rng = master.derive(kStreamQueryBase + q);
    const SimulatedQuery query =
        opt.uniform_vectors
            ? simulate_uniform_query(opt.cfg, opt.drivers, rng, opt.reveal_truth)
            : simulate_graph_query(*embedder, opt.cfg, opt.drivers, rng, opt.reveal_truth);
    write_text_file(fs::path(opt.out_dir) / transcript_name(q),
                    transcript_to_json(query.transcript));
  }
  std::cout << "wrote " << opt.queries << " transcript(s) to " << opt.out_dir << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------ attack

struct AttackOptions {
  std::string in_dir;
  std::vector<std::string> transcript_files;
  std::string out_file;
  std::string refs_file;
  GraphOptions graph;
  bool accumulate = false;
  bool refine = false;
  bool invert = false;
};

std::vector<fs::path> collect_transcripts(const AttackOptions& opt) {
  std::vector<fs::path> paths;
  for (const std::string& p : opt.transcript_files) paths.emplace_back(p);
  if (!opt.in_dir.empty()) {
    std::error_code ec;
    fs::directory_iterator it(opt.in_dir, ec);
    if (ec) {
      fail(Errc::io_error, "cannot list directory: " + opt.in_dir);
    }
    std::vector<fs::path> found;
    for (const auto& entry : it) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("transcript_", 0) == 0 && entry.path().extension() == ".json") {
        found.push_back(entry.path());
      }
    }
    std::sort(found.begin(), found.end());
    paths.insert(paths.end(), found.begin(), found.end());
  }
  if (paths.empty()) {
    fail(Errc::invalid_config, "no transcripts: pass --in DIR or --transcript FILE");
  }
  return paths;
}

int run_attack(const AttackOptions& opt) {
  const std::vector<fs::path> paths = collect_transcripts(opt);
  std::vector<MatchTranscript> transcripts;
  transcripts.reserve(paths.size());
  for (const fs::path& p : paths) {
    transcripts.push_back(transcript_from_json(read_text_file(p)));
  }
  const MatchTranscript& first = transcripts.front();
  for (const MatchTranscript& t : transcripts) {
    if (t.eta != first.eta || t.block_bits != first.block_bits ||
        t.num_blocks != first.num_blocks) {
      fail(Errc::config_mismatch, "transcripts disagree on (eta, l, m)");
    }
  }

  std::optional<RoadGraph> graph;
  std::optional<ReferenceSets> refs;
  EmbeddingConfig cfg;
  cfg.eta = first.eta;
  cfg.block_bits = first.block_bits;
  cfg.num_blocks = first.num_blocks;
  if (opt.refine || opt.invert) {
    if (opt.refs_file.empty() || !opt.graph.configured()) {
      fail(Errc::invalid_config, "--refine/--invert need --refs FILE and --grid/--graph");
    }
    auto [loaded_refs, loaded_cfg] = reference_sets_from_json(read_text_file(opt.refs_file));
    if (!loaded_cfg.same_shape(cfg)) {
      fail(Errc::config_mismatch, "reference-set config disagrees with the transcripts");
    }
    cfg = loaded_cfg;
    graph.emplace(opt.graph.build());
    loaded_refs.validate(*graph, cfg);
    refs = std::move(loaded_refs);
  }

  const auto analyze = [&](AttackState& state,
                           const MatchTranscript* truth) -> nlohmann::ordered_json {
    RecoveredLocations rec = state.recover();
    if (opt.refine && !rec.complete) {
      rec = refine_with_embedding(state, *graph, *refs, cfg);
    }
    RecoveryReportOptions report_opts;
    report_opts.truth = truth;
    std::vector<NodeId> rider_nodes;
    if (opt.invert && rec.complete) {
      rider_nodes = invert_to_nodes(*graph, *refs, cfg, *rec.rider);
      report_opts.rider_nodes = &rider_nodes;
    }
    return nlohmann::ordered_json::parse(recovery_to_json(rec, report_opts));
  };

  nlohmann::ordered_json output;
  if (opt.accumulate) {
    AttackState state(cfg);
    for (const MatchTranscript& t : transcripts) state.observe(t);
    // exact_match is only meaningful against a single query's ground truth
    const MatchTranscript* truth =
        transcripts.size() == 1 && transcripts.front().rider_truth.has_value()
            ? &transcripts.front()
            : nullptr;
    output = analyze(state, truth);
  } else {
    output = nlohmann::ordered_json::array();
    for (const MatchTranscript& t : transcripts) {
      AttackState state(cfg);
      state.observe(t);
      output.push_back(analyze(state, t.rider_truth.has_value() ? &t : nullptr));
    }
    if (output.size() == 1) output = output.front();
  }

  const std::string text = output.dump(2) + "\n";
  if (opt.out_file.empty()) {
    std::cout << text;
  } else {
    write_text_file(opt.out_file, text);
  }
  return kExitOk;
}

// ------------------------------------------------------------------ coupon

struct CouponOptions {
  std::string l_range = "1..4";
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  std::uint32_t workers = 1;
  std::string out_file;
  std::string mode = "uniform";
  GraphOptions graph;
  std::uint32_t eta = 8;
  std::uint32_t num_blocks = 5;
  std::uint32_t ref_set_size = 0;
  std::uint32_t drivers = 64;
  std::uint32_t queries = 20;
};

int run_coupon(const CouponOptions& opt) {
  const auto [lo, hi] = parse_range(opt.l_range);
  if (hi > kMaxClosedFormBlockBits) {
    fail(Errc::l_out_of_range, "--l-range upper bound exceeds " +
                                   std::to_string(kMaxClosedFormBlockBits));
  }
  const Rng master(opt.seed);
  std::ostringstream csv;

  if (opt.mode == "uniform") {
    csv << coupon_csv_header() << "\n";
    for (std::uint32_t l = lo; l <= hi; ++l) {
      const CouponStats stats =
          monte_carlo_drivers_needed(l, opt.trials, master.derive(kStreamCouponBase + l),
                                     opt.workers);
      csv << coupon_csv_row(stats) << "\n";
      std::cerr << "l=" << l << " exact expectation = " << stats.closed_form.exact_num << "/"
                << stats.closed_form.exact_den << "\n";
    }
  } else if (opt.mode == "graph") {
    if (hi > kMaxBlockBits) {
      fail(Errc::l_out_of_range, "graph mode supports l up to 8");
    }
    const RoadGraph graph = opt.graph.build();
    csv << "l,queries,cells,resolved_cells,mean_drivers_to_singleton,closed_form,closed_form_ceil"
        << "\n";
    for (std::uint32_t l = lo; l <= hi; ++l) {
      EmbeddingConfig cfg;
      cfg.eta = opt.eta;
      cfg.block_bits = l;
      cfg.num_blocks = opt.num_blocks;
      cfg.seed = opt.seed;
      cfg.ref_set_size = opt.ref_set_size;
      cfg.validate_for_graph(graph);
      Rng refs_rng = master.derive(kStreamReferenceSets + l);
      const ReferenceSets refs = build_reference_sets(graph, cfg, refs_rng);
      const Embedder embedder(graph, refs, cfg);
      std::vector<MatchTranscript> transcripts;
      transcripts.reserve(opt.queries);
      for (std::uint32_t q = 0; q < opt.queries; ++q) {
        Rng rng = master.derive(kStreamQueryBase + (static_cast<std::uint64_t>(l) << 32) + q);
        transcripts.push_back(
            simulate_graph_query(embedder, cfg, opt.drivers, rng, true).transcript);
      }
      const CoverageReport report = empirical_coverage_from_sim(transcripts);
      const HarmonicExpectation h = expected_drivers_closed_form(l);
      char buf[192];
      std::snprintf(buf, sizeof(buf), "%u,%u,%llu,%llu,%.6f,%.6f,%llu", l, opt.queries,
                    static_cast<unsigned long long>(report.total_cells),
                    static_cast<unsigned long long>(report.resolved_cells),
                    report.mean_drivers_to_singleton, h.value,
                    static_cast<unsigned long long>(h.ceil_value));
      csv << buf << "\n";
    }
  } else {
    fail(Errc::invalid_config, "--mode must be uniform or graph");
  }

  if (opt.out_file.empty()) {
    std::cout << csv.str();
  } else {
    write_text_file(opt.out_file, csv.str());
  }
  return kExitOk;
}

// ------------------------------------------------------------- lemma-check

struct LemmaCheckOptions {
  std::uint32_t l_max = 4;
  std::uint64_t seed = 0;
};

int run_lemma_check(const LemmaCheckOptions& opt) {
  if (opt.l_max < 1 || opt.l_max > 8) {
    fail(Errc::l_out_of_range, "--l-max must be in [1, 8]");
  }
  Rng rng(opt.seed);
  std::uint64_t total = 0;
  std::uint64_t failures = 0;
  for (std::uint32_t l = 1; l <= opt.l_max; ++l) {
    const std::uint32_t n = 1u << l;
    std::uint32_t ok = 0;
    for (std::uint32_t x = 0; x < n; ++x) {
      std::vector<std::int64_t> diffs;
      diffs.reserve(n);
      for (std::uint32_t z = 0; z < n; ++z) {
        diffs.push_back(static_cast<std::int64_t>(z) - x);
      }
      rng.shuffle(diffs);  // recovery must not depend on order
      ++total;
      std::uint32_t recovered = ~0u;
      try {
        recovered = recover_block_value(diffs, l);
      } catch (const Error&) {
      }
      if (recovered == x) {
        ++ok;
      } else {
        ++failures;
        std::cout << "FAIL l=" << l << " x=" << x << " recovered=" << recovered << "\n";
      }
    }
    std::cout << "l=" << l << ": " << ok << "/" << n << " block values recovered\n";
  }
  std::cout << (failures == 0 ? "PASS" : "FAIL") << ": " << (total - failures) << "/" << total
            << " cases\n";
  return failures == 0 ? kExitOk : kExitPropertyViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"block-leakage protocol simulator and passive-recovery toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read defaults from a key=value file (flags win)");

  SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand("simulate", "run seeded ride-request rounds");
  sim.graph.attach(*simulate);
  simulate->add_option("--eta", sim.cfg.eta, "embedding dimensions")->capture_default_str();
  simulate->add_option("--l", sim.cfg.block_bits, "bits per block (1..8)")->capture_default_str();
  simulate->add_option("--m", sim.cfg.num_blocks, "blocks per coordinate")->capture_default_str();
  simulate->add_option("--ref-set-size", sim.cfg.ref_set_size,
                       "reference set size (0 = ceil(log2(nodes)))");
  simulate->add_option("--drivers", sim.drivers, "responding drivers per query")
      ->capture_default_str();
  simulate->add_option("--queries", sim.queries, "independent queries")->capture_default_str();
  simulate->add_option("--seed", sim.cfg.seed, "master seed")->capture_default_str();
  simulate->add_option("--out", sim.out_dir, "output directory")->required();
  simulate->add_flag("--reveal-truth", sim.reveal_truth,
                     "embed ground-truth locations in transcripts (oracle testing)");
  simulate->add_flag("--uniform-vectors", sim.uniform_vectors,
                     "draw rider/driver vectors uniformly instead of placing them on a graph");

  AttackOptions atk;
  CLI::App* attack = app.add_subcommand("attack", "reconstruct locations from transcripts");
  attack->add_option("--in", atk.in_dir, "directory of transcript_*.json files");
  attack->add_option("--transcript", atk.transcript_files, "explicit transcript file(s)");
  attack->add_option("--out", atk.out_file, "write the recovery report here (default stdout)");
  attack->add_option("--refs", atk.refs_file, "reference sets json (for --refine/--invert)");
  atk.graph.attach(*attack);
  attack->add_flag("--accumulate", atk.accumulate,
                   "feed all transcripts into one attack state (same rider across queries)");
  attack->add_flag("--refine", atk.refine,
                   "intersect candidates with the public embedding table when narrowing stalls");
  attack->add_flag("--invert", atk.invert, "list graph nodes whose embedding matches the rider");

  CouponOptions cpn;
  CLI::App* coupon = app.add_subcommand("coupon", "drivers-needed-for-recovery analysis");
  coupon->add_option("--l-range", cpn.l_range, "block widths A..B")->capture_default_str();
  coupon->add_option("--trials", cpn.trials, "monte carlo trials per l")->capture_default_str();
  coupon->add_option("--seed", cpn.seed, "master seed")->capture_default_str();
  coupon->add_option("--workers", cpn.workers, "worker threads (result is identical for any count)")
      ->capture_default_str();
  coupon->add_option("--out", cpn.out_file, "write CSV here (default stdout)");
  coupon->add_option("--mode", cpn.mode, "uniform | graph")->capture_default_str();
  cpn.graph.attach(*coupon);
  coupon->add_option("--eta", cpn.eta, "graph mode: embedding dimensions")->capture_default_str();
  coupon->add_option("--m", cpn.num_blocks, "graph mode: blocks per coordinate")
      ->capture_default_str();
  coupon->add_option("--ref-set-size", cpn.ref_set_size, "graph mode: reference set size");
  coupon->add_option("--drivers", cpn.drivers, "graph mode: drivers per query")
      ->capture_default_str();
  coupon->add_option("--queries", cpn.queries, "graph mode: queries per l")->capture_default_str();

  LemmaCheckOptions lemma;
  CLI::App* lemma_check =
      app.add_subcommand("lemma-check", "exhaustively verify unique block recovery");
  lemma_check->add_option("--l-max", lemma.l_max, "check every l up to this bound (max 8)")
      ->capture_default_str();
  lemma_check->add_option("--seed", lemma.seed, "shuffle seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim);
    if (attack->parsed()) return run_attack(atk);
    if (coupon->parsed()) return run_coupon(cpn);
    if (lemma_check->parsed()) return run_lemma_check(lemma);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
