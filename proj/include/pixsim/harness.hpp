#pragma once

// Experiment front door: config parsing, seeded Monte Carlo sweeps over SNR,
// algorithm selection, timing, CSV emission.

#include <cstdint>
#include <string>
#include <vector>

#include "pixsim/codebook.hpp"
#include "pixsim/hierarchy.hpp"
#include "pixsim/sebo.hpp"
#include "pixsim/types.hpp"

namespace pixsim {

enum class Algorithm { FpAlt, ZfAlt, Codebook, Hierarchy, Conventional };

Algorithm algorithm_from_string(const std::string& s);
std::string to_string(Algorithm a);

struct ExperimentConfig {
  int n = 2;  // transmit antennas
  int u = 2;  // users
  int q = 39; // switches
  int k = 72; // spatial samples per polarization
  std::vector<double> snr_db = {10.0};
  int trials = 500;
  Algorithm algorithm = Algorithm::FpAlt;
  int d_bits = 6;
  int branching = 3;
  int layers = 6;
  std::uint64_t seed = 1;
  std::string port_model_path;  // empty -> seeded surrogate
  std::string codebook_path;
  std::string hierarchy_path;
  double rho_bar = 10.0;
  double sigma2 = 1.0;
  double rank_tol = 1e-6;
  double rel_tol = 1e-6;
  int max_iters = 50;      // online search outer iterations
  int fp_max_outer = 200;
  SeboConfig sebo;
  int workers = 0;         // 0 -> hardware concurrency
  bool timing = false;     // measured wall time in CSV; breaks byte reproducibility
  int training_samples = 1000;
};

struct ResultRow {
  double snr_db = 0.0;
  double mean_rate = 0.0;
  double std_err = 0.0;
  double mean_time_s = 0.0;
  double evals = 0.0;  // mean candidate evaluations per trial
};

ExperimentConfig load_config(const std::string& path);
void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value);
void validate_config(const ExperimentConfig& cfg);

std::vector<double> parse_snr_spec(const std::string& spec);  // "a:b:step", comma list, or single value

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg);

std::string csv_header();
std::string csv_string(const std::vector<ResultRow>& rows);
void write_csv(const std::string& path, const std::vector<ResultRow>& rows);

/// One row per (algorithm, snr) with measured timing, for side-by-side cost runs.
std::string bench_csv(const ExperimentConfig& cfg, const std::vector<Algorithm>& algorithms);

LloydDiagnostics train_codebook_cmd(const ExperimentConfig& cfg, const std::string& out_path);
HierarchyBuildDiagnostics train_hierarchy_cmd(const ExperimentConfig& cfg, const std::string& out_path);

}  // namespace pixsim
