#include "orh/block_codec.hpp"

#include <string>

#include "orh/errors.hpp"

namespace orh {

void check_block_bits(std::uint32_t block_bits) {
  if (block_bits < kMinBlockBits || block_bits > kMaxBlockBits) {
    fail(Errc::block_out_of_range,
         "block_bits must be in [1, 8], got " + std::to_string(block_bits));
  }
}

void check_block_geometry(std::uint32_t block_bits, std::uint32_t num_blocks) {
  check_block_bits(block_bits);
  if (num_blocks == 0) {
    fail(Errc::invalid_config, "num_blocks must be positive");
  }
  if (static_cast<std::uint64_t>(block_bits) * num_blocks > kMaxCoordBits) {
    fail(Errc::invalid_config, "block_bits * num_blocks must not exceed " +
                                   std::to_string(kMaxCoordBits) + " bits");
  }
}

BlockVector decompose(std::uint64_t value, std::uint32_t block_bits, std::uint32_t num_blocks) {
  check_block_geometry(block_bits, num_blocks);
  const std::uint32_t total_bits = block_bits * num_blocks;
  if (total_bits < 64 && value >> total_bits != 0) {
    fail(Errc::value_out_of_range, std::to_string(value) + " does not fit in " +
                                       std::to_string(total_bits) + " bits");
  }
  const std::uint64_t mask = (1ULL << block_bits) - 1;
  BlockVector out;
  out.block_bits = block_bits;
  out.blocks.resize(num_blocks);
  for (std::uint32_t j = 0; j < num_blocks; ++j) {
    out.blocks[j] = static_cast<std::uint32_t>((value >> (j * block_bits)) & mask);
  }
  return out;
}

std::uint64_t recompose(const BlockVector& bv) {
  check_block_geometry(bv.block_bits, bv.num_blocks());
  const std::uint64_t limit = 1ULL << bv.block_bits;
  std::uint64_t value = 0;
  for (std::uint32_t j = 0; j < bv.num_blocks(); ++j) {
    if (bv.blocks[j] >= limit) {
      fail(Errc::block_out_of_range,
           "block " + std::to_string(j) + " value " + std::to_string(bv.blocks[j]) +
               " exceeds " + std::to_string(bv.block_bits) + " bits");
    }
    value |= static_cast<std::uint64_t>(bv.blocks[j]) << (j * bv.block_bits);
  }
  return value;
}

std::int32_t ScaledDiff::unscaled(std::uint32_t block_bits) const {
  check_block_bits(block_bits);
  const std::uint64_t shift = static_cast<std::uint64_t>(block_index) * block_bits;
  if (shift > kMaxCoordBits) {
    fail(Errc::block_out_of_range, "block index " + std::to_string(block_index) + " out of range");
  }
  const std::int64_t scale = std::int64_t{1} << shift;
  if (value % scale != 0) {
    fail(Errc::inconsistent_observation,
         "scaled diff " + std::to_string(value) + " is not a multiple of 2^" +
             std::to_string(shift));
  }
  const std::int64_t d = value / scale;
  const std::int64_t bound = (std::int64_t{1} << block_bits) - 1;
  if (d < -bound || d > bound) {
    fail(Errc::inconsistent_observation,
         "unscaled diff " + std::to_string(d) + " outside [-(2^l-1), 2^l-1]");
  }
  return static_cast<std::int32_t>(d);
}

ScaledDiff signed_scaled_diff(std::uint32_t driver_block, std::uint32_t rider_block,
                              std::uint32_t block_index, std::uint32_t block_bits) {
  check_block_bits(block_bits);
  const std::uint64_t limit = 1ULL << block_bits;
  if (driver_block >= limit || rider_block >= limit) {
    fail(Errc::block_out_of_range, "block value exceeds " + std::to_string(block_bits) + " bits");
  }
  const std::uint64_t shift = static_cast<std::uint64_t>(block_index) * block_bits;
  if (shift > kMaxCoordBits) {
    fail(Errc::block_out_of_range, "block index " + std::to_string(block_index) + " out of range");
  }
  const std::int64_t raw =
      static_cast<std::int64_t>(driver_block) - static_cast<std::int64_t>(rider_block);
  return ScaledDiff{block_index, raw << shift};
}

std::int64_t sum_partial_diffs(const std::vector<ScaledDiff>& diffs, std::uint32_t block_bits,
                               std::uint32_t num_blocks) {
  check_block_geometry(block_bits, num_blocks);
  std::vector<bool> seen(num_blocks, false);
  std::int64_t total = 0;
  for (const ScaledDiff& d : diffs) {
    if (d.block_index >= num_blocks) {
      fail(Errc::block_out_of_range, "block index " + std::to_string(d.block_index) +
                                         " outside 0.." + std::to_string(num_blocks - 1));
    }
    if (seen[d.block_index]) {
      fail(Errc::duplicate_block, "two diffs for block " + std::to_string(d.block_index));
    }
    seen[d.block_index] = true;
    d.unscaled(block_bits);  // range + divisibility check
    total += d.value;
  }
  for (std::uint32_t j = 0; j < num_blocks; ++j) {
    if (!seen[j]) {
      fail(Errc::missing_block, "no diff for block " + std::to_string(j));
    }
  }
  return total;
}

}  // namespace orh
