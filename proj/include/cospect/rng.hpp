#pragma once

#include <cstdint>
#include <string_view>

namespace cospect {

// Counter-based randomness. Every random bit in the project is a pure
// function of (seed, counter) or (seed, key-bytes); no global state, so
// results are independent of worker count and evaluation order.

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t mix64(uint64_t a, uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

// FNV-1a over bytes, finished through splitmix64 for avalanche.
inline uint64_t hash_bytes(uint64_t seed, std::string_view bytes) {
  uint64_t h = 1469598103934665603ULL ^ splitmix64(seed);
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return splitmix64(h);
}

inline double u64_to_unit(uint64_t x) {
  return static_cast<double>(x >> 11) * (1.0 / 9007199254740992.0);  // [0,1)
}

// One stream per sample: stream i of run `seed` never collides with stream j.
class rng_stream {
public:
  rng_stream(uint64_t seed, uint64_t stream) : state_(mix64(seed, stream)) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform01() { return u64_to_unit(next_u64()); }

  // unbiased via rejection
  uint64_t below(uint64_t n) {
    uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

private:
  uint64_t state_;
};

// Deterministic environment bit: pure in (seed, key).
inline bool bernoulli_bit(uint64_t seed, std::string_view key, double p) {
  return u64_to_unit(hash_bytes(seed, key)) < p;
}

}  // namespace cospect
