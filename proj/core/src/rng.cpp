#include "ldpr/rng.hpp"

#include "ldpr/normal.hpp"

namespace ldpr {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

Rng Rng::substream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t state = mix_seed(seed);
  for (std::uint64_t key : keys) {
    state = mix_seed(state ^ mix_seed(key + 0x632be59bd9b4e019ULL));
  }
  return Rng(state);
}

double Rng::uniform() {
  // 53 random bits, shifted to the midpoint of the cell so 0 and 1 never occur.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return normal_quantile(uniform()); }

std::size_t Rng::below(std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

}  // namespace ldpr
