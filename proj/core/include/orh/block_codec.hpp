#pragma once

#include <cstdint>
#include <vector>

namespace orh {

// Limits on the block geometry. block_bits (the protocol's per-block width)
// stays within [1, 8]; block_bits * num_blocks stays within 62 bits so that
// coordinates fit in uint64_t and every signed scaled difference fits in
// int64_t with no wraparound.
inline constexpr std::uint32_t kMinBlockBits = 1;
inline constexpr std::uint32_t kMaxBlockBits = 8;
inline constexpr std::uint32_t kMaxCoordBits = 62;

void check_block_bits(std::uint32_t block_bits);
void check_block_geometry(std::uint32_t block_bits, std::uint32_t num_blocks);

// An l-bit-per-block little-endian decomposition of one embedding coordinate:
// value = sum_j blocks[j] * 2^(j*l). Block 0 is least significant.
struct BlockVector {
  std::uint32_t block_bits = 0;
  std::vector<std::uint32_t> blocks;

  std::uint32_t num_blocks() const { return static_cast<std::uint32_t>(blocks.size()); }
  bool operator==(const BlockVector&) const = default;
};

// Splits `value` into num_blocks blocks of block_bits bits each.
// Throws value_out_of_range if value does not fit.
BlockVector decompose(std::uint64_t value, std::uint32_t block_bits, std::uint32_t num_blocks);

// Exact inverse of decompose.
std::uint64_t recompose(const BlockVector& blocks);

// One signed scaled block difference (driver_block - rider_block) * 2^(j*l).
// This is precisely the per-block value the matching server learns in the
// clear for every responding driver.
struct ScaledDiff {
  std::uint32_t block_index = 0;  // j
  std::int64_t value = 0;         // multiple of 2^(j*l)

  // Removes the positional scale; validates divisibility and range.
  std::int32_t unscaled(std::uint32_t block_bits) const;

  bool operator==(const ScaledDiff&) const = default;
};

ScaledDiff signed_scaled_diff(std::uint32_t driver_block, std::uint32_t rider_block,
                              std::uint32_t block_index, std::uint32_t block_bits);

// Sums one ScaledDiff per block index 0..num_blocks-1. The result equals
// recompose(driver) - recompose(rider) for the generating block vectors.
// Throws missing_block / duplicate_block when the cover is wrong.
std::int64_t sum_partial_diffs(const std::vector<ScaledDiff>& diffs, std::uint32_t block_bits,
                               std::uint32_t num_blocks);

}  // namespace orh
