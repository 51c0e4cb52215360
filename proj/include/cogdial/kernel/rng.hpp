#pragma once

// Seeded random stream shared by the kernel and the dialogue layer.
//
// The standard <random> distributions are implementation-defined, so the
// draws used by the engine are computed here from raw 64-bit engine output.
// That keeps transcripts bit-identical across standard libraries.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace cogdial::kernel {

// SplitMix64 finalizer, used to derive independent seeds from one value.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives a seed for a named substream, e.g. derive_seed(seed, "user").
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(seed ^ h);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(mix64(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t draws() const noexcept { return draws_; }

  std::uint64_t next_u64() {
    ++draws_;
    return engine_();
  }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on the open interval (0, 1).
  double uniform_open01() {
    for (;;) {
      double u = uniform01();
      if (u > 0.0) return u;
    }
  }

  // Uniform integer in [0, n), unbiased by rejection. n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    for (;;) {
      std::uint64_t x = next_u64();
      if (x < limit) return x % n;
    }
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Zero-mean logistic variate with the given scale.
  double logistic(double scale) {
    if (scale == 0.0) return 0.0;
    double u = uniform_open01();
    return scale * std::log(u / (1.0 - u));
  }

  friend bool operator==(const Rng& a, const Rng& b) {
    return a.seed_ == b.seed_ && a.draws_ == b.draws_ && a.engine_ == b.engine_;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
  std::mt19937_64 engine_;
};

}  // namespace cogdial::kernel
