#pragma once

#include <cstdint>
#include <random>

namespace sweep {

// All randomness in the library flows through generators made here, keyed
// by a run seed plus a purpose tag, so every sample stream is reproducible
// and independent streams do not alias.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  // splitmix64 finalizer over the combined word
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t tag) {
  return std::mt19937_64(mix_seed(seed, tag));
}

}  // namespace sweep
