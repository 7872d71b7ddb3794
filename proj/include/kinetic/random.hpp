#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace kinetic {

// Purpose tags so that independent consumers of the same (seed, index) pair
// never share a generator.
enum class StreamTag : std::uint64_t {
  kTree = 1,
  kMarks = 2,
  kSpine = 3,
  kPanel = 4,
  kValidation = 5,
  kEstimate = 6,
  kResample = 7,
  kAux = 8,
};

// A seeded generator owned by exactly one task. Derived deterministically from
// (seed, index, tag) so results never depend on scheduling.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t index,
               StreamTag tag = StreamTag::kAux);

  // Uniform on the open interval (0, 1).
  // 53 random bits mapped to (0, 1); zero is redrawn.
  double uniform() {
    for (;;) {
      const std::uint64_t bits = engine_() >> 11;
      if (bits != 0) return static_cast<double>(bits) * 0x1.0p-53;
    }
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double exponential() { return -std::log(uniform()); }
  double normal() { return normal_(engine_); }
  std::uint64_t poisson(double mean);
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace kinetic
