// CLI front door for the pixel-antenna MU-MISO simulator.
//
// Subcommands:
//   gen-antenna      write a seeded surrogate antenna file (Z and E_oc blocks)
//   train-codebook   offline generalized-Lloyd flat codebook training
//   train-hierarchy  offline hierarchical codebook construction
//   run              seeded Monte Carlo SNR sweep -> CSV
//   bench            side-by-side algorithm sweep with measured timing -> CSV

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pixsim/harness.hpp"
#include "pixsim/port_model.hpp"
#include "pixsim/rng.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string snr_spec;
  std::string algorithm;
  std::string out_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
};

void add_common(CLI::App* cmd, CommonFlags& fl) {
  cmd->add_option("--config", fl.config_path, "key=value config file");
  cmd->add_option("--seed", fl.seed, "master seed")->each([&](const std::string&) { fl.seed_set = true; });
  cmd->add_option("--out", fl.out_path, "output path");
  cmd->add_option("--algorithm", fl.algorithm, "fp_alt|zf_alt|codebook|hierarchy|conventional");
  cmd->add_option("--snr-db", fl.snr_spec, "SNR points, a:b:step or comma list");
  cmd->add_option("--trials", fl.trials, "Monte Carlo trials per SNR point");
}

pixsim::ExperimentConfig resolve_config(const CommonFlags& fl) {
  pixsim::ExperimentConfig cfg;
  if (!fl.config_path.empty()) cfg = pixsim::load_config(fl.config_path);
  if (fl.seed_set) cfg.seed = fl.seed;
  if (!fl.algorithm.empty()) cfg.algorithm = pixsim::algorithm_from_string(fl.algorithm);
  if (!fl.snr_spec.empty()) cfg.snr_db = pixsim::parse_snr_spec(fl.snr_spec);
  if (fl.trials > 0) cfg.trials = fl.trials;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-user MISO pixel-antenna sum-rate simulator"};
  app.require_subcommand(1);

  CommonFlags fl;

  auto* gen = app.add_subcommand("gen-antenna", "write a seeded surrogate antenna file");
  int gen_q = 39, gen_k = 72;
  gen->add_option("--q", gen_q, "switch count");
  gen->add_option("--k", gen_k, "spatial samples per polarization");
  add_common(gen, fl);

  auto* traincb = app.add_subcommand("train-codebook", "train a flat antenna-coder codebook");
  add_common(traincb, fl);

  auto* trainh = app.add_subcommand("train-hierarchy", "build a hierarchical antenna-coder codebook");
  add_common(trainh, fl);

  auto* run = app.add_subcommand("run", "Monte Carlo SNR sweep, CSV output");
  add_common(run, fl);

  auto* bench = app.add_subcommand("bench", "timed sweep across algorithms, CSV output");
  std::string bench_algos = "fp_alt,zf_alt,codebook,hierarchy,conventional";
  bench->add_option("--algorithms", bench_algos, "comma list of algorithms to time");
  add_common(bench, fl);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      if (fl.out_path.empty()) throw std::invalid_argument("gen-antenna needs --out <path>");
      const auto m = pixsim::synthesize_surrogate(gen_q, gen_k, fl.seed_set ? fl.seed : 1);
      pixsim::save_port_model(fl.out_path, m);
      std::cout << "wrote surrogate antenna q=" << gen_q << " k=" << gen_k << " to " << fl.out_path << "\n";
      return 0;
    }

    pixsim::ExperimentConfig cfg = resolve_config(fl);

    if (traincb->parsed()) {
      if (fl.out_path.empty()) throw std::invalid_argument("train-codebook needs --out <path>");
      const auto diag = pixsim::train_codebook_cmd(cfg, fl.out_path);
      std::cout << "codebook trained: M=" << (1 << cfg.d_bits) << " rounds=" << diag.rounds
                << (diag.converged ? " (converged)" : " (round cap)") << " duplicates=" << diag.duplicate_codewords
                << " empty-cell repairs=" << diag.empty_cell_repairs << "\n";
      std::cout << "objective trace:";
      for (double v : diag.objective_trace) std::cout << ' ' << v;
      std::cout << "\nwrote " << fl.out_path << "\n";
      return 0;
    }
    if (trainh->parsed()) {
      if (fl.out_path.empty()) throw std::invalid_argument("train-hierarchy needs --out <path>");
      const auto diag = pixsim::train_hierarchy_cmd(cfg, fl.out_path);
      std::cout << "hierarchy built: A=" << cfg.branching << " L=" << cfg.layers
                << " empty-children=" << diag.empty_children << "\n";
      for (std::size_t l = 0; l < diag.partition_sizes.size(); ++l) {
        std::cout << "layer " << (l + 1) << " training sizes:";
        for (int s : diag.partition_sizes[l]) std::cout << ' ' << s;
        std::cout << "\n";
      }
      std::cout << "wrote " << fl.out_path << "\n";
      return 0;
    }
    if (run->parsed()) {
      const auto rows = pixsim::run_sweep(cfg);
      const std::string csv = pixsim::csv_string(rows);
      if (fl.out_path.empty()) {
        std::cout << csv;
      } else {
        std::ofstream os(fl.out_path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open for write: " + fl.out_path);
        os << csv;
        std::cout << "wrote " << fl.out_path << "\n";
      }
      return 0;
    }
    if (bench->parsed()) {
      std::vector<pixsim::Algorithm> algos;
      std::istringstream ss(bench_algos);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) algos.push_back(pixsim::algorithm_from_string(tok));
      const std::string csv = pixsim::bench_csv(cfg, algos);
      if (fl.out_path.empty()) {
        std::cout << csv;
      } else {
        std::ofstream os(fl.out_path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open for write: " + fl.out_path);
        os << csv;
        std::cout << "wrote " << fl.out_path << "\n";
      }
      return 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
