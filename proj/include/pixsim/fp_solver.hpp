#pragma once

// Alternating sum-rate maximization over the precoder and the per-user
// antenna coders: closed-form auxiliary updates, a Lagrangian-bisection
// precoder step, and SEBO on the separable coder subproblems.

#include <cstdint>
#include <vector>

#include "pixsim/port_model.hpp"
#include "pixsim/sebo.hpp"
#include "pixsim/types.hpp"

namespace pixsim {

struct FpConfig {
  double p_budget = 1.0;
  RVec sigma2;  // per-user noise variances; resized/filled with 1.0 if empty
  int max_outer = 200;
  double rel_tol = 1e-6;
  double bisect_tol = 1e-12;  // relative tolerance on transmit power
  SeboConfig sebo;
  std::uint64_t seed = 0;  // derives per-(iteration,user) SEBO streams
};

struct SolveReport {
  std::vector<double> rate_trace;      // sum rate per outer iteration (leading entry = initial point)
  std::vector<double> objective_trace; // search algorithms: winning candidate objective per user update
  int iterations = 0;
  double wall_time_s = 0.0;
  RVec sinrs;
  bool budget_exhausted = false;

  // diagnostics recorded while solving
  double max_tightness_gap = 0.0;      // max |R_tilde - R| after the iota/tau updates
  double min_trace_delta = 0.0;        // most negative consecutive rate-trace step
  double max_power_violation = 0.0;    // max(||P||_F^2 - budget, 0) over iterates
  double max_binding_power_dev = 0.0;  // max relative |power - budget| among binding updates
  long long candidate_evals = 0;       // codeword/coder candidate evaluations (search solvers)
  long long zf_builds = 0;             // ZF precoder constructions (search solvers)
};

struct FpResult {
  CMat precoder;  // n x u
  std::vector<AntennaCoder> coders;
  SolveReport report;
};

// --- rate algebra over effective channels -------------------------------

double sinr_from_heff(const std::vector<CVec>& h_eff, const CMat& p, int user, double sigma2_user);
double sum_rate_from_heff(const std::vector<CVec>& h_eff, const CMat& p, const RVec& sigma2);

double sinr(const CMat& p, const CVec& w_u, const ReducedChannel& h_bar_u, int user, double sigma2_user);
double sum_rate(const CMat& p, const std::vector<CVec>& ws, const std::vector<ReducedChannel>& channels,
                const RVec& sigma2);

// --- block updates -------------------------------------------------------

RVec update_iota(const std::vector<CVec>& h_eff, const CMat& p, const RVec& sigma2);
CVec update_tau(const std::vector<CVec>& h_eff, const CMat& p, const RVec& iota, const RVec& sigma2);

double fp_surrogate(const std::vector<CVec>& h_eff, const CMat& p, const RVec& iota, const CVec& tau,
                    const RVec& sigma2);

struct PrecoderUpdate {
  CMat p;
  double mu = 0.0;
  bool binding = false;
  double power = 0.0;
};

PrecoderUpdate update_precoder(const std::vector<CVec>& h_eff, const RVec& iota, const CVec& tau, double p_budget,
                               double bisect_tol);

/// Per-user coder subproblem objective 2 Re{w(b)^H q_u} - w(b)^H Q_u w(b).
BinaryObjective coder_objective(const ReducedChannel& chan, const CMat& p, double iota_u, cxd tau_u,
                                int user, PatternTable& table);

std::vector<AntennaCoder> update_coders(const std::vector<ReducedChannel>& channels, const CMat& p, const RVec& iota,
                                        const CVec& tau, PatternTable& table, std::vector<AntennaCoder> current,
                                        const SeboConfig& sebo_cfg, std::uint64_t seed_base,
                                        long long* eval_counter = nullptr);

// --- outer loop ----------------------------------------------------------

FpResult fp_alternate(const std::vector<ReducedChannel>& channels, const PortModel& model, const PatternBasis& basis,
                      const FpConfig& cfg);

}  // namespace pixsim
