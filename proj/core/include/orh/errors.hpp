#pragma once

#include <stdexcept>
#include <string>

namespace orh {

// Every failure mode the library reports. The CLI maps these onto process
// exit codes (config 2, I/O 3, inconsistent input 4).
enum class Errc {
  invalid_config,
  invalid_node_id,
  negative_weight,
  disconnected_graph,
  eta_exceeds_budget,
  coordinate_overflow,
  dimension_mismatch,
  value_out_of_range,
  block_out_of_range,
  missing_block,
  duplicate_block,
  config_mismatch,
  no_match,
  empty_response_set,
  malformed_difference_set,
  inconsistent_observation,
  l_out_of_range,
  incomplete_experiment,
  parse_error,
  io_error,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace orh
