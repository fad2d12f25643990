#pragma once

#include <cstdint>

namespace ipersea {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256** seeded through splitmix64. The standard-library engines and
// distributions are implementation-defined, which would break the
// byte-identical-output contract of seeded experiments, so all randomness
// in the simulator goes through this.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, n). Multiply-shift bounding; the ~2^-64 bias is
  // irrelevant here and the mapping is platform-independent.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // Uniform double in [0, 1).
  double real01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return real01() < p; }

  // Independent deterministic stream for a named pipeline stage.
  static Rng stream(std::uint64_t master, std::uint64_t tag) {
    std::uint64_t sm = master ^ (0xa0761d6478bd642fULL * (tag + 1));
    return Rng(splitmix64(sm));
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4]{};
};

}  // namespace ipersea
