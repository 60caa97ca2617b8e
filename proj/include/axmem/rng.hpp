#pragma once

#include <cstdint>

namespace axmem {

/// Deterministic 64-bit PRNG (xorshift64* seeded through splitmix64).
/// Same seed + same call sequence => same output sequence, on every platform.
class InjectorRng {
public:
  explicit InjectorRng(uint64_t seed) : state_(splitmix64(seed + 0x9e3779b97f4a7c15ULL)) {
    if (state_ == 0) state_ = 0x6a09e667f3bcc909ULL;
  }

  uint64_t next_u64() {
    uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545f4914f6cdd1dULL;
  }

  /// Uniform double in [0, 1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound). bound must be > 0.
  uint64_t next_below(uint64_t bound) { return next_u64() % bound; }

  /// Derive an independent child stream; does not advance this generator.
  InjectorRng fork(uint64_t stream_id) const {
    return InjectorRng(splitmix64(state_ ^ (stream_id * 0xbf58476d1ce4e5b9ULL)));
  }

  static uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

private:
  uint64_t state_;
};

} // namespace axmem
