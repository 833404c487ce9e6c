#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace airlfd {

// Deterministic, portable RNG used everywhere in the library.
//
// The integer stream is splitmix64: output_i = mix64(seed + (i+1)*GOLDEN),
// a counter-based bijective mix with no hidden state beyond the counter.
// Identical seeds produce identical streams on any platform. Gaussian
// deviates use the trigonometric Box-Muller transform on top of the
// uniform stream (two deviates per pair of uniforms, second one cached).
struct SplitMix64 {
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t next() { return mix64(state_ += kGolden); }

  // Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1]; safe as a log() argument.
  double uniform_pos() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Modulo bias is ~n/2^64, irrelevant here.
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  // Standard normal deviate (Box-Muller).
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Independent substream for (seed, stream index); lets per-file or per-tree
// generation run in any order without changing the result.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t stream) {
  return SplitMix64(SplitMix64::mix64(seed) ^
                    SplitMix64::mix64(stream ^ 0x632BE59BD9B4E019ull));
}

// In-place Fisher-Yates shuffle driven by the portable stream.
template <typename T>
void shuffle(std::vector<T>& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace airlfd
