#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace ldpr {

// Seeded random source threaded explicitly through every stochastic routine.
//
// Variates are produced from the raw 64-bit engine output by our own
// transforms (not std:: distributions) so a seed reproduces bit-identical
// streams across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent stream keyed by (seed, keys...). Used to give every case,
  // date and repetition its own stream so results do not depend on the
  // order in which work units are scheduled.
  static Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

  std::uint64_t next() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform();

  // Standard normal via inverse CDF of uniform().
  double normal();

  // Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer; exposed for seed derivation in the harness.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace ldpr
