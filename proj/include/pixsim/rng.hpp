#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "pixsim/types.hpp"

namespace pixsim {

// splitmix64 step; also the seed-derivation mixer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stable derived stream id: master seed mixed with a path of indices
// (snr point, trial, user, ...). Every random draw in a sweep is keyed
// this way so runs are reproducible regardless of scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = master;
  splitmix64(s);
  for (std::uint64_t p : path) {
    s ^= 0x9e3779b97f4a7c15ULL + p;
    splitmix64(s);
  }
  std::uint64_t t = s;
  return splitmix64(t);
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

/// One draw from CN(0,1): real and imaginary parts N(0, 1/2).
inline cxd complex_normal(std::mt19937_64& rng) {
  static constexpr double kHalfSigma = 0.70710678118654752440;  // 1/sqrt(2)
  std::normal_distribution<double> n(0.0, kHalfSigma);
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

inline CMat complex_normal_matrix(int rows, int cols, std::mt19937_64& rng) {
  CMat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = complex_normal(rng);
  return m;
}

}  // namespace pixsim
