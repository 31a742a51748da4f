#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pwt {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// independent stream seed for (seed, index, tag)
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t tag = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ index) ^ (tag * 0xd1b54a32d192ed03ULL));
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::uint64_t index = 0, std::uint64_t tag = 0) {
  return Engine(derive_seed(seed, index, tag));
}

// Box-Muller on 53-bit uniforms; portable across standard libraries
inline double standard_normal(Engine& g) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  auto unif = [&] { return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53; };
  double u1 = unif(), u2 = unif();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

inline double uniform01(Engine& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

}  // namespace pwt
