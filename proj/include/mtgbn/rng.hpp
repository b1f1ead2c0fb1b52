#pragma once

#include <cstdint>
#include <random>

namespace mtgbn {

// splitmix64 finalizer; used to turn (seed, tag) pairs into well-mixed child seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seeded random stream passed explicitly to every sampling routine.
//
// derive(tag) produces an independent child stream from the *original* seed and the
// tag only, never from consumption state, so parallel or reordered sub-computations
// stay byte-reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return engine_; }

  Rng derive(std::uint64_t tag) const { return Rng(mix64(seed_ ^ mix64(tag))); }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  double gamma(double shape, double scale) {
    return std::gamma_distribution<double>(shape, scale)(engine_);
  }
  // Accepts non-integer degrees of freedom (chi^2_k = Gamma(k/2, 2)).
  double chi_squared(double df) { return gamma(df / 2.0, 2.0); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace mtgbn
