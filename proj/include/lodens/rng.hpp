#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lodens {

using Rng = std::mt19937_64;

//! SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

//! Order-free seed derivation: the stream for (master, keys...) does not
//! depend on which other streams were drawn before it.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> keys)
{
  std::uint64_t s = mix64(master);
  for (auto k : keys)
    s = mix64(s ^ mix64(k + 0x632be59bd9b4e019ULL));
  return s;
}

//! Uniform draw on [0, 1) with 53 random bits; identical across standard
//! libraries, unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng)
{
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace lodens
