#pragma once

#include <cstdint>

namespace sfpca {

// Counter-based generator: output i of stream s is splitmix64(s + i * golden).
// Streams are stateless apart from the counter, so replicate r of a run with
// seed s can draw from CounterRng(s + r) independently of evaluation order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = seed_ + 0x9E3779B97F4A7C15ULL * (++counter_);
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  // Uniform on (0,1), never returning an endpoint.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via the inverse CDF so that any implementation of this
  // stream reproduces the same variates bit-for-bit.
  double next_normal() { return normal_quantile(next_uniform()); }

  // AS 241 (PPND16), |error| < 1e-15 over (0,1).
  static double normal_quantile(double p);

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace sfpca
