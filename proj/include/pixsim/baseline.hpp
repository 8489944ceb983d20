#pragma once

// Reference systems: conventional fixed-pattern users with ZF precoding and
// water-filling power allocation, and a ZF-precoding + SEBO-coder variant
// for pixel users.

#include <cstdint>
#include <vector>

#include "pixsim/codebook.hpp"
#include "pixsim/port_model.hpp"
#include "pixsim/sebo.hpp"
#include "pixsim/types.hpp"

namespace pixsim {

struct PowerAllocation {
  RVec powers;     // per-user, >= 0, sums to the budget
  double level = 0.0;  // shared water level over funded channels
};

/// max(0, level - 1/g_u) allocation meeting the budget exactly.
PowerAllocation water_fill(const RVec& gains, double p_budget);

/// Sum rate of the conventional system: ZF directions from the raw 1 x n
/// user rows, water-filled power over the per-user effective gains.
double conventional_system_rate(const CMat& channel_rows, double p_budget, const RVec& sigma2);

/// Alternating ZF precoding and per-user SEBO antenna coding; each SEBO
/// candidate is scored with a fresh uniform-power ZF response against the
/// frozen peers (the full-space counterpart of the codebook search).
SearchResult zf_alt_optimize(const std::vector<ReducedChannel>& channels, const PortModel& model,
                             const PatternBasis& basis, const SearchConfig& cfg, const SeboConfig& sebo_cfg);

}  // namespace pixsim
