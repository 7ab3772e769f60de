#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orh/protocol_sim.hpp"
#include "orh/rng.hpp"

namespace orh {

inline constexpr std::uint32_t kMaxClosedFormBlockBits = 16;

// The exact expected number of uniform draws from 2^l values until every
// value has appeared: 2^l * (1 + 1/2 + ... + 1/2^l). Carried as a reduced
// exact fraction alongside the rounded forms.
struct HarmonicExpectation {
  std::uint32_t block_bits = 0;
  std::string exact_num;   // reduced numerator, decimal
  std::string exact_den;   // reduced denominator, decimal
  std::uint64_t ceil_value = 0;
  double value = 0.0;
};

// l in [1, 16]; throws l_out_of_range otherwise.
HarmonicExpectation expected_drivers_closed_form(std::uint32_t block_bits);

struct CouponStats {
  std::uint32_t block_bits = 0;
  std::uint64_t trials = 0;
  HarmonicExpectation closed_form;
  double mc_mean = 0.0;
  double mc_stddev = 0.0;  // sample stddev; 0 for a single trial
  std::uint64_t p50 = 0;
  std::uint64_t p90 = 0;
  std::uint64_t p99 = 0;
};

// Monte Carlo: each trial draws uniform block values until all 2^l are seen.
// Per-trial seeds derive from `master`, so the result is independent of the
// worker count and reproducible from the seed alone.
CouponStats monte_carlo_drivers_needed(std::uint32_t block_bits, std::uint64_t trials,
                                       const Rng& master, std::uint32_t workers = 1);

// CSV interface of the analysis:
//   l,trials,closed_form,closed_form_ceil,mc_mean,mc_std,p50,p90,p99
std::string coupon_csv_header();
std::string coupon_csv_row(const CouponStats& stats);

// How many drivers each block position actually consumed before its candidate
// interval collapsed, measured by replaying transcripts driver by driver.
// Boundary differences can collapse an interval before full value coverage,
// so these counts may undercut the coupon-collector expectation.
struct CoverageCell {
  std::uint32_t coordinate = 0;
  std::uint32_t block = 0;
  std::uint64_t resolved_queries = 0;           // queries whose interval collapsed
  std::uint64_t total_queries = 0;
  double mean_drivers_to_singleton = 0.0;       // over resolved queries
};

struct CoverageReport {
  std::vector<CoverageCell> cells;  // eta * num_blocks entries
  std::uint64_t resolved_cells = 0;
  std::uint64_t total_cells = 0;
  double mean_drivers_to_singleton = 0.0;  // over all resolved (cell, query) pairs
};

// Requires ground truth on every transcript (incomplete_experiment otherwise);
// the truth cross-checks each collapsed interval.
CoverageReport empirical_coverage_from_sim(const std::vector<MatchTranscript>& transcripts);

}  // namespace orh
