#pragma once

#include <cstdint>
#include <random>

namespace proce {

// Deterministic random source used everywhere in the library.
//
// All distribution transforms are implemented here (instead of relying on
// std::*_distribution) so that a given seed produces bit-identical streams on
// every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform index in [0, n); n must be positive.
  std::size_t uniform_index(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

  // Gaussian via Box-Muller. sigma == 0 returns mu exactly.
  double normal(double mu, double sigma);

  // Derives an independent child seed for a named sub-stream, so parallel
  // consumers (e.g. per-instance searches) never share state.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace proce
