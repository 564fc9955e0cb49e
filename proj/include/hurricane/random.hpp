#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace hurricane {

/// SplitMix64 finalizer. Used wherever a value must be a pure function of its
/// inputs (synthetic profiles, oracle tables).
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Maps 64 random bits onto [0, 1).
constexpr double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Deterministic value in [0, 1) keyed by (seed, a, tag).
inline double hash_unit(std::uint64_t seed, std::uint64_t a, std::string_view tag) {
  return unit_interval(mix64(mix64(seed ^ mix64(a)) ^ fnv1a64(tag)));
}

std::string hex64(std::uint64_t value);

/// Seeded generator with portable bounded draws (std distributions are
/// implementation-defined, which would break cross-platform reproducibility).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [0, n), n > 0. Lemire's rejection method.
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t x = engine_();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        x = engine_();
        m = static_cast<__uint128_t>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  int index(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

  double uniform() { return unit_interval(engine_()); }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hurricane
