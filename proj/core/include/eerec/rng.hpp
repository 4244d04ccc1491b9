#pragma once

#include <cstdint>
#include <random>

namespace eerec {

/// Seeded 64-bit Mersenne Twister with a draw counter.
///
/// mt19937_64 output is fixed by the standard; the conversion to doubles is
/// done here rather than through <random> distributions, whose algorithms are
/// implementation-defined. That keeps draws identical across platforms, and
/// (seed, draws) is enough to restore the stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() {
    ++draws_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<double>(hi - lo + 1);
    auto v = lo + static_cast<std::int64_t>(uniform() * span);
    return v > hi ? hi : v;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Advances the stream by n draws.
  void skip(std::uint64_t n) {
    engine_.discard(n);
    draws_ += n;
  }

  std::uint64_t draws() const { return draws_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
};

/// Independent sub-stream seeds derived from one session seed (splitmix64 step).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace eerec
