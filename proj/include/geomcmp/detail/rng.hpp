#pragma once

#include <cstdint>
#include <random>

namespace geomcmp::detail {

/// Deterministic uniform generator. mt19937_64 has a standard-specified
/// sequence and the [0,1) mapping below avoids std::uniform_real_distribution,
/// whose output is implementation-defined; identical seeds therefore produce
/// identical draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  [[nodiscard]] double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  [[nodiscard]] double uniform(double a, double b) {
    return a + (b - a) * uniform();
  }

  [[nodiscard]] std::uint64_t bits() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

/// Stateless mix for deriving independent per-trial seeds from a base seed.
[[nodiscard]] inline std::uint64_t mix_seed(std::uint64_t base,
                                            std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace geomcmp::detail
