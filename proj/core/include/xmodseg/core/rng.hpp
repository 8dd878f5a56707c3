#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace xmodseg {

// Deterministic RNG with implementation-independent distributions.
// std::mt19937_64 output is pinned by the standard; the distribution
// adaptors below avoid the libstdc++/libc++ divergence in
// std::normal_distribution and friends, so corpora are bit-identical
// across toolchains for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 mantissa bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer in [lo, hi] via rejection-free modulo of a wide draw; bias is
  // below 2^-32 for the small ranges used here.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<std::int64_t>(engine_() % span);
  }

  // Box-Muller; one value per call (the pair's twin is discarded to keep
  // the stream position independent of call parity).
  double normal(double mean = 0.0, double sigma = 1.0) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sigma * r * std::cos(2.0 * M_PI * u2);
  }

  // Child stream with a seed derived from (this stream's seed, tag).
  // SplitMix64 finalizer over the tag hash keeps children decorrelated.
  static std::uint64_t derive(std::uint64_t seed, const std::string& tag) {
    std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
    for (const char c : tag) {
      h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
      h *= 0x100000001b3ULL;
    }
    h += 0x9e3779b97f4a7c15ULL;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    return h ^ (h >> 31);
  }

  Rng child(const std::string& tag) { return Rng(derive(engine_(), tag)); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace xmodseg
