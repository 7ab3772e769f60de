#include "orh/coupon_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

#include <boost/multiprecision/cpp_int.hpp>

#include "orh/attack.hpp"
#include "orh/errors.hpp"

namespace orh {

namespace mp = boost::multiprecision;

HarmonicExpectation expected_drivers_closed_form(std::uint32_t block_bits) {
  if (block_bits < 1 || block_bits > kMaxClosedFormBlockBits) {
    fail(Errc::l_out_of_range, "closed form supports l in [1, " +
                                   std::to_string(kMaxClosedFormBlockBits) + "], got " +
                                   std::to_string(block_bits));
  }
  const std::uint64_t n = 1ULL << block_bits;

  // 2^l * H_{2^l} over the common denominator lcm(1..n) = prod p^max_e. The
  // scaled numerator is sum_t n * lcm / t, all divisions exact. Reduction
  // works off the denominator's known factorization with small divisions
  // only; a general big-integer gcd at these sizes is far slower.
  std::vector<bool> composite(n + 1, false);
  std::vector<std::uint64_t> primes;
  for (std::uint64_t p = 2; p <= n; ++p) {
    if (!composite[p]) {
      primes.push_back(p);
      for (std::uint64_t q = p * p; q <= n; q += p) composite[q] = true;
    }
  }
  mp::cpp_int lcm = 1;
  for (const std::uint64_t p : primes) {
    std::uint64_t prime_power = p;
    while (prime_power <= n / p) prime_power *= p;
    lcm *= prime_power;
  }
  mp::cpp_int num = 0;
  for (std::uint64_t t = 1; t <= n; ++t) {
    num += lcm / t;
  }
  num *= n;
  mp::cpp_int den = lcm;
  for (const std::uint64_t p : primes) {
    while (num % p == 0 && den % p == 0) {
      num /= p;
      den /= p;
    }
  }

  HarmonicExpectation out;
  out.block_bits = block_bits;
  out.exact_num = num.str();
  out.exact_den = den.str();

  const mp::cpp_int q = num / den;
  const mp::cpp_int r = num % den;
  out.ceil_value = q.convert_to<std::uint64_t>() + (r != 0 ? 1 : 0);
  // Double value via integer part + scaled remainder (num and den themselves
  // overflow double for large l).
  const mp::cpp_int scaled = (r << 62) / den;
  out.value =
      q.convert_to<double>() + std::ldexp(scaled.convert_to<double>(), -62);
  return out;
}

namespace {

std::uint64_t draws_until_coverage(std::uint32_t block_bits, Rng& rng,
                                   std::vector<std::uint8_t>& seen) {
  const std::uint64_t n = 1ULL << block_bits;
  std::fill(seen.begin(), seen.end(), 0);
  std::uint64_t draws = 0;
  std::uint64_t distinct = 0;
  while (distinct < n) {
    const std::uint64_t v = rng.uniform(n);
    ++draws;
    if (!seen[v]) {
      seen[v] = 1;
      ++distinct;
    }
  }
  return draws;
}

}  // namespace

CouponStats monte_carlo_drivers_needed(std::uint32_t block_bits, std::uint64_t trials,
                                       const Rng& master, std::uint32_t workers) {
  if (trials == 0) {
    fail(Errc::invalid_config, "monte carlo needs at least one trial");
  }
  CouponStats stats;
  stats.block_bits = block_bits;
  stats.trials = trials;
  stats.closed_form = expected_drivers_closed_form(block_bits);

  if (workers == 0) workers = 1;
  workers = static_cast<std::uint32_t>(std::min<std::uint64_t>(workers, trials));

  // Each worker handles a strided slice of trial indices; per-trial rngs are
  // derived from the master seed, so the merged histogram is identical for
  // any worker count.
  std::vector<std::map<std::uint64_t, std::uint64_t>> histograms(workers);
  const std::uint64_t n = 1ULL << block_bits;
  auto run_slice = [&](std::uint32_t worker) {
    std::vector<std::uint8_t> seen(n, 0);
    auto& hist = histograms[worker];
    for (std::uint64_t trial = worker; trial < trials; trial += workers) {
      Rng rng = master.derive(trial);
      ++hist[draws_until_coverage(block_bits, rng, seen)];
    }
  };
  if (workers == 1) {
    run_slice(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::uint32_t w = 0; w < workers; ++w) pool.emplace_back(run_slice, w);
    for (std::thread& t : pool) t.join();
  }
  std::map<std::uint64_t, std::uint64_t> hist;
  for (const auto& partial : histograms) {
    for (const auto& [draws, count] : partial) hist[draws] += count;
  }

  unsigned __int128 sum = 0;
  unsigned __int128 sum_sq = 0;
  for (const auto& [draws, count] : hist) {
    sum += static_cast<unsigned __int128>(draws) * count;
    sum_sq += static_cast<unsigned __int128>(draws) * draws * count;
  }
  const double mean = static_cast<double>(sum) / static_cast<double>(trials);
  stats.mc_mean = mean;
  if (trials > 1) {
    const double ss = static_cast<double>(sum_sq) - static_cast<double>(trials) * mean * mean;
    stats.mc_stddev = std::sqrt(std::max(0.0, ss / static_cast<double>(trials - 1)));
  }

  const auto quantile = [&](std::uint64_t pct) {
    const std::uint64_t target = (trials * pct + 99) / 100;  // ceil
    std::uint64_t cumulative = 0;
    for (const auto& [draws, count] : hist) {
      cumulative += count;
      if (cumulative >= target) return draws;
    }
    return hist.rbegin()->first;
  };
  stats.p50 = quantile(50);
  stats.p90 = quantile(90);
  stats.p99 = quantile(99);
  return stats;
}

std::string coupon_csv_header() {
  return "l,trials,closed_form,closed_form_ceil,mc_mean,mc_std,p50,p90,p99";
}

std::string coupon_csv_row(const CouponStats& s) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%u,%llu,%.6f,%llu,%.6f,%.6f,%llu,%llu,%llu", s.block_bits,
                static_cast<unsigned long long>(s.trials), s.closed_form.value,
                static_cast<unsigned long long>(s.closed_form.ceil_value), s.mc_mean, s.mc_stddev,
                static_cast<unsigned long long>(s.p50), static_cast<unsigned long long>(s.p90),
                static_cast<unsigned long long>(s.p99));
  return buf;
}

CoverageReport empirical_coverage_from_sim(const std::vector<MatchTranscript>& transcripts) {
  if (transcripts.empty()) {
    fail(Errc::incomplete_experiment, "no transcripts to analyze");
  }
  const std::uint32_t eta = transcripts.front().eta;
  const std::uint32_t block_bits = transcripts.front().block_bits;
  const std::uint32_t num_blocks = transcripts.front().num_blocks;

  CoverageReport report;
  report.cells.reserve(static_cast<std::size_t>(eta) * num_blocks);
  for (std::uint32_t i = 0; i < eta; ++i) {
    for (std::uint32_t j = 0; j < num_blocks; ++j) {
      report.cells.push_back(CoverageCell{i, j, 0, 0, 0.0});
    }
  }
  std::vector<std::uint64_t> cell_sum(report.cells.size(), 0);
  std::uint64_t all_sum = 0;
  std::uint64_t all_resolved = 0;

  for (const MatchTranscript& t : transcripts) {
    if (t.eta != eta || t.block_bits != block_bits || t.num_blocks != num_blocks) {
      fail(Errc::config_mismatch, "transcripts disagree on (eta, l, m)");
    }
    if (!t.rider_truth.has_value() || t.driver_truth.size() != t.per_driver.size()) {
      fail(Errc::incomplete_experiment,
           "coverage analysis needs transcripts recorded with ground truth");
    }
    AttackState state(eta, block_bits, num_blocks);
    std::vector<std::uint64_t> first_singleton(report.cells.size(), 0);  // 0 = not yet
    for (std::size_t k = 0; k < t.per_driver.size(); ++k) {
      state.observe_driver(t.per_driver[k].driver_id, t.per_driver[k].scaled_diffs);
      for (std::uint32_t i = 0; i < eta; ++i) {
        for (std::uint32_t j = 0; j < num_blocks; ++j) {
          const std::size_t cell = static_cast<std::size_t>(i) * num_blocks + j;
          if (first_singleton[cell] == 0 && state.cell(i, j).singleton()) {
            first_singleton[cell] = k + 1;
            const std::uint32_t truth =
                decompose(t.rider_truth->vec.coords[i], block_bits, num_blocks).blocks[j];
            if (state.cell(i, j).value() != truth) {
              fail(Errc::inconsistent_observation,
                   "collapsed interval disagrees with recorded ground truth");
            }
          }
        }
      }
    }
    for (std::size_t cell = 0; cell < report.cells.size(); ++cell) {
      ++report.cells[cell].total_queries;
      if (first_singleton[cell] != 0) {
        ++report.cells[cell].resolved_queries;
        cell_sum[cell] += first_singleton[cell];
        all_sum += first_singleton[cell];
        ++all_resolved;
      }
    }
  }

  for (std::size_t cell = 0; cell < report.cells.size(); ++cell) {
    if (report.cells[cell].resolved_queries > 0) {
      report.cells[cell].mean_drivers_to_singleton =
          static_cast<double>(cell_sum[cell]) /
          static_cast<double>(report.cells[cell].resolved_queries);
      ++report.resolved_cells;
    }
  }
  report.total_cells = report.cells.size();
  if (all_resolved > 0) {
    report.mean_drivers_to_singleton =
        static_cast<double>(all_sum) / static_cast<double>(all_resolved);
  }
  return report;
}

}  // namespace orh
