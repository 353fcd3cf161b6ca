#pragma once

#include <cstdint>
#include <vector>

namespace ntrocr {

// splitmix64 stream. Small, fast, and stable across platforms, which keeps
// seeded runs byte-reproducible.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  float uniform_f(float lo, float hi) {
    float u = static_cast<float>(next_u64() >> 40) * 0x1.0p-24f;
    return lo + (hi - lo) * u;
  }

  // Uniform integer in [0, n). Multiply-shift keeps modulo bias negligible.
  uint64_t below(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<__uint128_t>(next_u64()) * n) >> 64);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
};

// Derives an independent stream from a base seed and a few tags, so the
// training loop can hand every (purpose, epoch, sample) its own generator.
inline uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b = 0,
                            uint64_t c = 0) {
  Rng r(seed ^ 0x6A09E667F3BCC909ull);
  uint64_t h = r.next_u64();
  h ^= a + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  Rng r2(h);
  h = r2.next_u64();
  h ^= b + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  Rng r3(h);
  h = r3.next_u64();
  h ^= c + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  Rng r4(h);
  return r4.next_u64();
}

}  // namespace ntrocr
