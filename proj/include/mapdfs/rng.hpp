#pragma once

#include <cstdint>
#include <vector>

namespace mapdfs {

// Deterministic, platform-independent PRNG (xoshiro256**, seeded via splitmix64).
// std::uniform_*_distribution is implementation-defined, so bounded draws are
// done by hand to keep traces byte-identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t bounded(uint64_t n) {
    return static_cast<uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
  }

  int index(int n) { return static_cast<int>(bounded(static_cast<uint64_t>(n))); }

  // Uniform double in [0, 1).
  double real01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return real01() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = bounded(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // Independent stream for a sub-purpose; stable for a fixed (seed, tag).
  Rng fork(uint64_t tag) const {
    uint64_t x = s_[0] ^ (tag * 0x9e3779b97f4a7c15ull);
    return Rng(splitmix64(x));
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  uint64_t s_[4];
};

}  // namespace mapdfs
