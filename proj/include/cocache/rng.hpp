#pragma once

#include <cstdint>
#include <initializer_list>

namespace cocache {

// splitmix64: small, portable and fully specified, so traces are reproducible
// across standard libraries (unlike std::*_distribution).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  // Uniform on {0, ..., n-1}; rejection sampling removes modulo bias.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
    std::uint64_t x;
    do x = next();
    while (x >= limit);
    return x % n;
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = seed;
  for (std::uint64_t p : parts) {
    SplitMix64 g(h ^ (p + 0x632be59bd9b4e019ULL));
    h = g.next();
  }
  return h;
}

template <class... Parts>
std::uint64_t mix_seed(std::uint64_t seed, Parts... parts) {
  return mix_seed(seed, {static_cast<std::uint64_t>(parts)...});
}

}  // namespace cocache
