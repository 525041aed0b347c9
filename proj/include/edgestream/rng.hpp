#pragma once

#include <cstdint>
#include <random>

namespace edgestream {

// SplitMix64 step. Used to derive independent sub-seeds from one base seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t s = seed ^ (0xa0761d6478bd642fULL + salt * 0xe7037ed1a0b428dbULL);
  return splitmix64(s);
}

// Deterministic RNG with a portable output stream. mt19937_64 is fully
// specified by the standard; the mappings below avoid the
// implementation-defined std::uniform_* distributions so that identical
// seeds give identical draws on any toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n). n must be > 0. Modulo bias is irrelevant at the
  // queue sizes involved here.
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }

  // Uniform in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double real(double lo, double hi) { return lo + (hi - lo) * unit(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace edgestream
