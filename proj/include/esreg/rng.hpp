#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace esreg {

// splitmix64 step; used to derive well-separated seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic per-stream child seed so parallel replications draw from
// independent, reproducible streams regardless of scheduling.
inline std::uint64_t child_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  (void)splitmix64(s);
  s ^= 0x9e3779b97f4a7c15ULL * (stream + 1);
  return splitmix64(s);
}

// mt19937_64 core (its output sequence is fixed by the standard) with
// hand-rolled transforms, so draws are identical across platforms and
// standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the pair's second value is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Student t with 3 degrees of freedom: Z / sqrt(chi2_3 / 3).
  double student_t3() {
    const double z = normal();
    double chi2 = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double g = normal();
      chi2 += g * g;
    }
    return z / std::sqrt(chi2 / 3.0);
  }

  // Chi-squared with 2 degrees of freedom (raw, mean 2).
  double chi_squared2() {
    const double a = normal();
    const double b = normal();
    return a * a + b * b;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace esreg
