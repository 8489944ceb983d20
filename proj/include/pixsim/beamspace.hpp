#pragma once

// Reduced multi-user channel sampling and effective MISO channels. The
// default path samples the n_eff x n reduced channel directly (i.i.d.
// Rayleigh); the full virtual-channel path exists as a statistical
// cross-check of that reduction.

#include <random>
#include <vector>

#include "pixsim/port_model.hpp"
#include "pixsim/types.hpp"

namespace pixsim {

std::vector<ReducedChannel> sample_reduced(int n_eff, int n, int u_count, std::mt19937_64& rng);

/// Samples a fresh 2k x 2k virtual channel and compresses it through the
/// pattern basis and the transmit patterns: u_mat^T H_v e_t.
ReducedChannel sample_virtual_and_reduce(const PatternBasis& basis, const CMat& e_t, std::mt19937_64& rng);

/// Random orthonormal transmit pattern matrix (2k x n), for validation runs.
CMat random_orthonormal_patterns(int two_k, int n, std::mt19937_64& rng);

/// h_eff = w^H h_bar, stored as a length-n vector.
CVec effective_channel(const CVec& w, const CMat& h_bar);

}  // namespace pixsim
