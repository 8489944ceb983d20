#pragma once

// Successive exhaustive boolean optimization: cyclic exhaustive search over
// J-bit blocks until a full pass stops improving, then random multi-bit flip
// escapes, each accepted escape re-triggering the block cycling.

#include <cstdint>
#include <functional>
#include <vector>

#include "pixsim/types.hpp"

namespace pixsim {

struct SeboConfig {
  int block_size = 4;     // J
  int max_cycles = 20;    // full passes over all blocks per cycling phase
  int flip_rounds = 10;   // random escape attempts
  std::uint64_t seed = 0;
  double rel_tol = 1e-8;  // pass-over-pass relative improvement cutoff
};

struct SeboTrace {
  std::vector<double> values;  // objective after each block update, non-decreasing
  std::size_t evaluations = 0;
  bool budget_exhausted = false;
};

struct SeboResult {
  AntennaCoder best;
  double value = 0.0;
  SeboTrace trace;
};

using BinaryObjective = std::function<double(const AntennaCoder&)>;

SeboResult sebo_maximize(const BinaryObjective& f, int q, const SeboConfig& cfg,
                         const AntennaCoder* start = nullptr);

}  // namespace pixsim
