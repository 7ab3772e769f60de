#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace orh {

// Seeded generator wrapper. All randomness in the library flows through this
// class so that a run is reproducible bit-for-bit from its seed: mt19937_64 is
// fully specified by the standard, and the integer draws below avoid
// std::uniform_int_distribution, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Unbiased draw from [0, bound), bound > 0, by rejection.
  std::uint64_t uniform(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

  // Independent child stream, e.g. one per trial or per query. Children with
  // distinct stream ids are decorrelated from each other and from the parent.
  Rng derive(std::uint64_t stream) const { return Rng(mix(seed_ ^ mix(stream))); }

  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Fisher-Yates using the portable uniform() above.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform(i)]);
    }
  }

  // `count` distinct values from [0, population), partial Fisher-Yates.
  std::vector<std::uint32_t> sample_without_replacement(std::uint32_t population,
                                                        std::uint32_t count) {
    std::vector<std::uint32_t> pool(population);
    for (std::uint32_t i = 0; i < population; ++i) pool[i] = i;
    std::vector<std::uint32_t> out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint64_t j = i + uniform(population - i);
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace orh
