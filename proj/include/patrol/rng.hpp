#pragma once

#include <cstdint>
#include <random>

namespace patrol {

// splitmix64; used to derive independent per-trial seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Trial i draws from a generator seeded by a deterministic function of
// (master_seed, i), so trials can run in any order or in parallel.
inline std::uint64_t seed_for_trial(std::uint64_t master_seed, std::uint64_t trial) {
  return splitmix64(master_seed ^ splitmix64(trial + 1));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace patrol
