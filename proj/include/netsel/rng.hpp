#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace netsel {

// splitmix64 finalizer. Used both to derive child seeds and as a counter-based
// generator for per-packet loss draws, where the value must depend only on the
// key and never on call order.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b));
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix64(mix64(a, b), c);
}

inline double u64_to_unit(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Seeded stream with hand-rolled distributions so results do not depend on
// the standard library's unspecified distribution algorithms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return u64_to_unit(next_u64()); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; caches the second variate.
  double normal(double mean = 0.0, double stddev = 1.0) {
    if (has_cached_) {
      has_cached_ = false;
      return mean + stddev * cached_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return mean + stddev * r * std::cos(a);
  }

  double exponential(double mean) {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return -mean * std::log(u);
  }

  // Independent child stream identified by `tag`; derivation depends only on
  // this stream's construction seed, not on how much has been drawn.
  Rng child(std::uint64_t tag) const { return Rng(mix64(seed_, tag)); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Fisher-Yates shuffle driven by the explicit stream.
template <typename Vec>
void shuffle_in_place(Vec& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace netsel
