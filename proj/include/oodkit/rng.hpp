#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace oodkit {

// SplitMix64 (Steele, Lea & Flood). The constants below are part of the
// on-disk reproducibility contract for class splits and synthetic data:
//   state += 0x9E3779B97F4A7C15
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   z ^= z >> 31
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound); plain modulo reduction (bias is irrelevant at the
  // class-list sizes involved, and it keeps the mapping trivially portable).
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

  // Uniform in (0, 1) from the top 53 bits.
  double uniform() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Box-Muller; one normal per call.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace oodkit
