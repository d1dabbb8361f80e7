#pragma once

#include <cstdint>

namespace rimlab {

// Identifier embedded in every output that records random draws.
inline constexpr char kRngAlgorithm[] = "splitmix64";

// k-th output of the splitmix64 sequence seeded at `seed`.  Counter-based:
// a pure function of (seed, counter), so any consumer can address any
// position of the stream directly and batches can be laid out in a fixed
// order that does not depend on how many threads execute them.
inline std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed, std::uint64_t start = 0)
      : seed_(seed), ctr_(start) {}

  std::uint64_t next_u64() { return splitmix64_at(seed_, ctr_++); }

  // Uniform double in [0,1) built from the top 53 bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  std::uint64_t counter() const { return ctr_; }

  // Decorrelated seed for substream `stream` of a run seeded at `seed`.
  static std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64_at(seed ^ 0x5851f42d4c957f2dULL, stream);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t ctr_;
};

}  // namespace rimlab
