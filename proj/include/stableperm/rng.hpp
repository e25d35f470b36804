#pragma once

#include <cstdint>
#include <random>

namespace stableperm {

/// SplitMix64 finalizer. Used to derive independent sub-stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of sub-stream `k` of `master`. Chaining calls gives multi-level keys,
/// e.g. derive_seed(derive_seed(master, n), trial).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k) noexcept {
  return mix64(mix64(master) ^ (k * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

/// Seeded 64-bit generator with a platform-independent output sequence.
///
/// The engine is std::mt19937_64, whose raw output is fixed by the standard.
/// The derived draws below avoid the std distributions, which are
/// implementation-defined, so identical seeds give identical draws everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(mix64(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent generator for sub-stream `k`.
  Rng stream(std::uint64_t k) const { return Rng(derive_seed(seed_, k)); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace stableperm
