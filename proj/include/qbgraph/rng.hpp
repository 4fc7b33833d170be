#pragma once

#include <cstdint>
#include <random>

namespace qbg {

/// SplitMix64 finaliser (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the substream for (seed, sample_index).
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t sample_index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(sample_index + 0x632be59bd9b4e019ULL));
}

/// Platform-stable random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard distributions are implementation-defined, so the
/// conversions to doubles and bounded integers are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t seed, std::uint64_t sample_index) {
    return Rng(substream_seed(seed, sample_index));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform on {0, ..., bound - 1}; Lemire's multiply-and-reject.
  std::uint64_t below(std::uint64_t bound) {
    __extension__ using u128 = unsigned __int128;
    u128 prod = static_cast<u128>(engine_()) * bound;
    auto low = static_cast<std::uint64_t>(prod);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        prod = static_cast<u128>(engine_()) * bound;
        low = static_cast<std::uint64_t>(prod);
      }
    }
    return static_cast<std::uint64_t>(prod >> 64);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qbg
