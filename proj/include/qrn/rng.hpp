#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qrn {

// Seeded generator with self-contained distributions. mt19937_64 output is
// fixed by the standard, and the Box-Muller transform below avoids the
// library-dependent std::normal_distribution, so streams replay identically
// across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Independent child stream; lets per-seed experiments draw in any order
  // without perturbing each other.
  Rng fork(std::uint64_t salt) const {
    return Rng(seed_ ^ (0x9e3779b97f4a7c15ULL * (salt + 0x243f6a8885a308d3ULL)));
  }

  std::uint64_t bits() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; caches the second deviate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace qrn
