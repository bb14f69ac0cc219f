#pragma once
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace dnk {

// splitmix64: used only to expand seeds into generator state.
struct SplitMix64 {
  uint64_t s;
  explicit SplitMix64(uint64_t seed) : s(seed) {}
  uint64_t next() {
    uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

// Stream-splitting rule: every independent unit of work (record, candidate,
// episode, tick) draws from its own generator seeded by
//   derive_seed(base, stream) = second splitmix64 output of
//                               base + GOLDEN * (stream + 1).
// Results are therefore a pure function of (base, stream) and independent of
// scheduling or batching order.
inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
  SplitMix64 sm(base + 0x9E3779B97F4A7C15ULL * (stream + 1));
  sm.next();
  return sm.next();
}

// xoshiro256++ (Blackman & Vigna), state expanded from the seed by splitmix64.
struct Rng {
  uint64_t s[4];
  bool has_spare = false;
  double spare = 0.0;

  explicit Rng(uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& w : s) w = sm.next();
  }

  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t next_u64() {
    uint64_t r = rotl(s[0] + s[3], 23) + s[0];
    uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return r;
  }

  // [0,1) with 53 random bits.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
  // (0,1]; safe as a log() argument.
  double uniform_pos() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double uniform_range(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller with cached second variate.
  double normal() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    double u1 = uniform_pos();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare = r * std::sin(a);
    has_spare = true;
    return r * std::cos(a);
  }

  void fill_normal(double* v, size_t n) {
    for (size_t i = 0; i < n; ++i) v[i] = normal();
  }

  // Unbiased integer in [0, n) by rejection.
  int uniform_int(int n) {
    uint64_t bound = uint64_t(n);
    uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return int(x % bound);
  }

  // Fisher-Yates.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = size_t(uniform_int(int(i)));
      std::swap(v[i - 1], v[j]);
    }
  }
};

inline Rng subrng(uint64_t base, uint64_t stream) { return Rng(derive_seed(base, stream)); }

}  // namespace dnk
