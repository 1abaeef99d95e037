#pragma once

#include <cstdint>
#include <random>

namespace skysweep {

// Seeded RNG with hand-rolled scaling so draws do not depend on how the
// standard library implements its distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(gen_() % span);
  }

  // Derive an independent stream, e.g. one per view or per parameter.
  Rng fork(std::uint64_t salt) {
    return Rng(gen_() ^ (salt * 0x9e3779b97f4a7c15ull));
  }

 private:
  std::mt19937_64 gen_;
};

// SplitMix-style integer hash, used for stateless procedural noise.
inline std::uint64_t hash_u64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline double hash_unit(std::uint64_t x) {
  return static_cast<double>(hash_u64(x) >> 11) * 0x1.0p-53;
}

}  // namespace skysweep
