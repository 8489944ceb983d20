#pragma once

// Multiport network model of a switch-reconfigurable pixel antenna: one
// antenna port plus q pixel ports terminated by two-state loads. Maps a
// switch-state bit vector to port currents, a unit-norm pattern coder over
// the orthogonal pattern basis, and the radiated pattern itself.

#include <cstdint>
#include <string>
#include <unordered_map>

#include "pixsim/types.hpp"

namespace pixsim {

struct PortModel {
  cxd z_aa;     // antenna-port self impedance
  CVec z_pa;    // trans-impedance, length q
  CMat z_pp;    // pixel-port impedance block, q x q, symmetric
  CMat e_oc;    // open-circuit patterns, 2k x (q+1)
  int q = 0;    // switch count
  int k = 0;    // spatial samples per polarization
  double open_load_beta = 1e10;  // |z| of the "off" (open) switch load, jc*beta

  CMat full_z() const;  // (q+1) x (q+1) assembled impedance matrix
};

/// Thin SVD of e_oc truncated at the rank threshold.
struct PatternBasis {
  CMat u_mat;  // 2k x n_eff, semi-unitary
  RVec s;      // n_eff singular values, descending, > 0
  CMat v_mat;  // (q+1) x n_eff, semi-unitary
  int n_eff = 0;
};

PortModel load_port_model(const std::string& path);
void save_port_model(const std::string& path, const PortModel& m);

PortModel synthesize_surrogate(int q, int k, std::uint64_t seed);

/// Diagonal of the load matrix: j*beta where the bit is 1 (open), 0 where 0 (short).
CVec load_impedance(const AntennaCoder& b, double beta = 1e10);

/// Normalized port current vector [1; -(z_pp + Z_L(b))^-1 z_pa], length q+1.
CVec port_currents(const PortModel& m, const AntennaCoder& b);

PatternBasis reduce_basis(const PortModel& m, double rank_tol = 1e-6);

/// Unit-norm pattern coder w(b) = normalize(S V^T conj(i(b))).
CVec pattern_coder(const PatternBasis& basis, const PortModel& m, const AntennaCoder& b);

/// Coded radiation pattern e(b) = U conj(w(b)), unit norm.
CVec radiation_pattern(const PortModel& m, const AntennaCoder& b, const PatternBasis& basis);

/// Memoizes pattern coders by bit string; the coder subproblems revisit the
/// same few configurations many times. Not thread-safe; use one per solve.
class PatternTable {
 public:
  PatternTable(const PatternBasis& basis, const PortModel& model) : basis_(basis), model_(model) {}

  const CVec& get(const AntennaCoder& b);
  std::size_t size() const { return cache_.size(); }
  int q() const { return model_.q; }

 private:
  const PatternBasis& basis_;
  const PortModel& model_;
  std::unordered_map<std::string, CVec> cache_;
};

}  // namespace pixsim
