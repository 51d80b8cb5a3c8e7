// Counter-based splittable RNG. Streams are identified by a 64-bit key derived
// from (seed, purpose tag, indices...); the i-th output of a stream depends only
// on (key, i), so any draw can be regenerated without replaying the stream.
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace rfim {

// Purpose tags for key derivation. Keeping them in one place avoids collisions
// between independent streams that share a master seed.
namespace rng_tag {
inline constexpr std::uint64_t kDisorder = 1;
inline constexpr std::uint64_t kChain = 2;
inline constexpr std::uint64_t kEstimator = 3;
inline constexpr std::uint64_t kBootstrap = 4;
inline constexpr std::uint64_t kFk = 5;
inline constexpr std::uint64_t kColoring = 6;
inline constexpr std::uint64_t kOracle = 7;
}  // namespace rng_tag

// Finalizer from splitmix64 (Vigna). Bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Chain-mix a path of identifiers into a stream key.
inline std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t k = mix64(seed);
  for (std::uint64_t p : path) k = mix64(k ^ mix64(p + 0x632BE59BD9B4E019ULL));
  return k;
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  static RngStream keyed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    return RngStream(derive_key(seed, path));
  }

  // Random access: value at a fixed counter, independent of stream position.
  std::uint64_t at(std::uint64_t counter) const {
    return mix64(key_ + counter * 0x9E3779B97F4A7C15ULL);
  }

  std::uint64_t next_u64() { return at(counter_++); }

  // Uniform in [0,1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n) via 128-bit multiply-shift.
  std::uint32_t next_below(std::uint32_t n) {
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool next_bool() { return (next_u64() >> 63) != 0; }

  // Box-Muller; consumes two uniforms per call.
  double next_gaussian() {
    double u1 = 1.0 - next_unit();  // (0,1]
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Gaussian draw addressed by (key, index): suitable for regenerating one site's
// disorder value without touching the others.
inline double gaussian_at(std::uint64_t key, std::uint64_t index) {
  RngStream s(key);
  double u1 = 1.0 - static_cast<double>(s.at(2 * index) >> 11) * 0x1.0p-53;
  double u2 = static_cast<double>(s.at(2 * index + 1) >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

inline double rademacher_at(std::uint64_t key, std::uint64_t index) {
  RngStream s(key);
  return (s.at(index) >> 63) ? 1.0 : -1.0;
}

}  // namespace rfim
