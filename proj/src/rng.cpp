#include "proce/rng.hpp"

#include <cmath>
#include <numbers>

#include "proce/error.hpp"

namespace proce {

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw UsageError("uniform_index: n must be positive");
  // Map a 53-bit uniform into [0, n); bias is < 2^-53 * n, negligible for the
  // population/index sizes used here, and fully deterministic.
  auto idx = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return idx < n ? idx : n - 1;
}

double Rng::normal(double mu, double sigma) {
  if (sigma < 0.0) throw UsageError("normal: sigma must be non-negative");
  if (sigma == 0.0) return mu;
  if (have_spare_) {
    have_spare_ = false;
    return mu + sigma * spare_;
  }
  // Box-Muller; 1 - uniform() lies in (0, 1], keeping the log finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return mu + sigma * r * std::cos(theta);
}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream); decorrelates nearby seeds.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace proce
