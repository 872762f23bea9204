#pragma once

#include <cstdint>
#include <vector>

namespace fieldcalc {

// Deterministic splitmix64 generator. Every run derives all randomness
// from one seed so reports are reproducible byte for byte across
// platforms (no stdlib distributions involved).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n) by rejection.
  std::uint64_t bounded(std::uint64_t n) {
    if (n == 0) return 0;
    std::uint64_t threshold = (~n + 1) % n;  // 2^64 mod n
    while (true) {
      std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

  // Derives an independent stream; changing one consumer cannot
  // perturb another.
  Rng fork() { return Rng(next()); }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(bounded(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[static_cast<size_t>(bounded(items.size()))];
  }

 private:
  std::uint64_t state_;
};

}  // namespace fieldcalc
