#ifndef POPSYNC_RNG_HPP
#define POPSYNC_RNG_HPP

#include <cstdint>

namespace popsync {

// splitmix64 (Steele/Lea/Flood; public-domain reference constants).
// Used both as the simulation stream generator and, via mix64, to derive
// per-run seeds as mix64(seed + run_index). Pure integer arithmetic, so the
// same seed reproduces the same stream on every platform.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform value in [0, n) by rejection, n >= 1.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1)
      return 0;
    std::uint64_t limit = (~0ULL / n) * n;
    std::uint64_t v = next();
    while (v >= limit)
      v = next();
    return v % n;
  }

 private:
  std::uint64_t state_;
};

}  // namespace popsync

#endif
