#pragma once

// Offline generalized-Lloyd training of a flat antenna-coder codebook and
// the online joint ZF-precoding + one-dimensional codebook search.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pixsim/fp_solver.hpp"
#include "pixsim/port_model.hpp"
#include "pixsim/sebo.hpp"
#include "pixsim/types.hpp"

namespace pixsim {

struct FlatCodebook {
  std::vector<AntennaCoder> codewords;

  int size() const { return static_cast<int>(codewords.size()); }
  int q() const { return codewords.empty() ? 0 : codewords.front().size(); }
};

FlatCodebook load_codebook(const std::string& path);
void save_codebook(const std::string& path, const FlatCodebook& cb);

/// S channel bundles; bundle s stacks the U users' reduced channels side by
/// side as an n_eff x (n*users) matrix.
struct TrainingSet {
  int users = 1;
  int n = 1;
  std::vector<CMat> samples;

  int size() const { return static_cast<int>(samples.size()); }
  auto user_block(int s, int u) const { return samples[static_cast<std::size_t>(s)].middleCols(u * n, n); }
};

TrainingSet make_training_set(int n_eff, int n, int users, int count, std::mt19937_64& rng);

// --- zero forcing --------------------------------------------------------

/// Unit-norm ZF direction columns for the stacked rows; false when the Gram
/// matrix is rank-deficient (condition beyond 1e12).
bool try_zf_directions(const std::vector<CVec>& rows, CMat& unit_cols);

/// Uniform-power ZF precoder: column u carries power p_budget/U exactly.
CMat zf_precoder(const CMat& h_eff_rows, double p_budget);

// --- offline training ----------------------------------------------------

/// Sum-rate metric of one training bundle under a single shared codeword:
/// sum_u log2(1 + rho_bar |h_u p_u|^2) with unit-norm ZF directions built
/// from the codeword's effective channels. -inf when ZF is infeasible.
double training_metric(const TrainingSet& ts, int sample, const AntennaCoder& codeword, double rho_bar,
                       PatternTable& table);

struct LloydDiagnostics {
  std::vector<double> objective_trace;  // after each partition and centroid step
  int rounds = 0;
  int empty_cell_repairs = 0;
  int duplicate_codewords = 0;
  bool converged = false;
};

/// Generalized Lloyd over an explicit subset of sample indices with an
/// arbitrary codebook size (the hierarchical sub-codebook problem has the
/// same form). `subset` empty means the whole set.
FlatCodebook lloyd_train_m(const TrainingSet& ts, const std::vector<int>& subset, int m_codewords, double rho_bar,
                           const SeboConfig& sebo_cfg, std::uint64_t seed, PatternTable& table,
                           LloydDiagnostics* diag = nullptr);

/// Flat-codebook variant with M = 2^d_bits codewords.
FlatCodebook lloyd_train(const TrainingSet& ts, int d_bits, double rho_bar, const SeboConfig& sebo_cfg,
                         std::uint64_t seed, const PortModel& model, const PatternBasis& basis,
                         LloydDiagnostics* diag = nullptr);

// --- online search -------------------------------------------------------

struct SearchConfig {
  double p_budget = 1.0;
  RVec sigma2;  // filled with ones if empty
  int max_iters = 50;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;
};

struct SearchResult {
  CMat precoder;
  std::vector<AntennaCoder> coders;
  SolveReport report;
};

SearchResult flat_search_optimize(const std::vector<ReducedChannel>& channels, const FlatCodebook& cb,
                                  const PortModel& model, const PatternBasis& basis, const SearchConfig& cfg);

namespace detail {

// Shared candidate-evaluation state for the flat and hierarchical searches.
struct SearchState {
  const std::vector<ReducedChannel>* channels = nullptr;
  RVec sigma2;
  double p_budget = 1.0;
  std::vector<CVec> h_star;
  long long candidate_evals = 0;
  long long zf_builds = 0;

  // Objective of swapping user u's effective channel for h_cand while peers
  // stay frozen: own rate under the candidate ZF precoder plus the frozen
  // peers' rates under that same precoder. -inf when ZF fails.
  double evaluate_candidate(int user, const CVec& h_cand, CMat* zf_out);

  // Uniform-power ZF for the current rows; false on rank failure.
  bool current_zf(CMat& p);
};

RVec checked_sigma2(const RVec& sigma2, int users);

}  // namespace detail

}  // namespace pixsim
