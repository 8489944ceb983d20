#include "pixsim/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pixsim/baseline.hpp"
#include "pixsim/beamspace.hpp"
#include "pixsim/fp_solver.hpp"
#include "pixsim/rng.hpp"

namespace pixsim {

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "fp_alt") return Algorithm::FpAlt;
  if (s == "zf_alt") return Algorithm::ZfAlt;
  if (s == "codebook") return Algorithm::Codebook;
  if (s == "hierarchy") return Algorithm::Hierarchy;
  if (s == "conventional") return Algorithm::Conventional;
  throw std::invalid_argument("unknown algorithm '" + s + "' (expected fp_alt|zf_alt|codebook|hierarchy|conventional)");
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::FpAlt: return "fp_alt";
    case Algorithm::ZfAlt: return "zf_alt";
    case Algorithm::Codebook: return "codebook";
    case Algorithm::Hierarchy: return "hierarchy";
    case Algorithm::Conventional: return "conventional";
  }
  return "?";
}

std::vector<double> parse_snr_spec(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    double a = 0, b = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(spec);
    if (!(ss >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0))
      throw std::invalid_argument("bad snr spec '" + spec + "' (expected a:b:step with step > 0)");
    for (double v = a; v <= b + 1e-9; v += step) out.push_back(v);
    return out;
  }
  std::istringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  if (out.empty()) throw std::invalid_argument("bad snr spec '" + spec + "'");
  return out;
}

void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  auto to_int = [&](const std::string& v) { return std::stoi(v); };
  auto to_dbl = [&](const std::string& v) { return std::stod(v); };
  if (key == "n") cfg.n = to_int(value);
  else if (key == "u") cfg.u = to_int(value);
  else if (key == "q") cfg.q = to_int(value);
  else if (key == "k") cfg.k = to_int(value);
  else if (key == "snr_db") cfg.snr_db = parse_snr_spec(value);
  else if (key == "trials") cfg.trials = to_int(value);
  else if (key == "algorithm") cfg.algorithm = algorithm_from_string(value);
  else if (key == "d") cfg.d_bits = to_int(value);
  else if (key == "a") cfg.branching = to_int(value);
  else if (key == "l") cfg.layers = to_int(value);
  else if (key == "seed") cfg.seed = std::stoull(value);
  else if (key == "port_model") cfg.port_model_path = (value == "surrogate" ? "" : value);
  else if (key == "codebook") cfg.codebook_path = value;
  else if (key == "hierarchy") cfg.hierarchy_path = value;
  else if (key == "rho_bar") cfg.rho_bar = to_dbl(value);
  else if (key == "sigma2") cfg.sigma2 = to_dbl(value);
  else if (key == "rank_tol") cfg.rank_tol = to_dbl(value);
  else if (key == "rel_tol") cfg.rel_tol = to_dbl(value);
  else if (key == "max_iters") cfg.max_iters = to_int(value);
  else if (key == "fp_max_outer") cfg.fp_max_outer = to_int(value);
  else if (key == "sebo_j") cfg.sebo.block_size = to_int(value);
  else if (key == "sebo_cycles") cfg.sebo.max_cycles = to_int(value);
  else if (key == "sebo_flips") cfg.sebo.flip_rounds = to_int(value);
  else if (key == "workers") cfg.workers = to_int(value);
  else if (key == "timing") cfg.timing = (value == "true" || value == "1" || value == "on");
  else if (key == "training_samples") cfg.training_samples = to_int(value);
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    auto strip = [](std::string s) {
      const auto sb = s.find_first_not_of(" \t");
      if (sb == std::string::npos) return std::string();
      const auto se = s.find_last_not_of(" \t");
      return s.substr(sb, se - sb + 1);
    };
    try {
      apply_config_entry(cfg, strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
    } catch (const std::exception& ex) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (cfg.n < 1 || cfg.u < 1) throw std::invalid_argument("config: n and u must be >= 1");
  if (cfg.k < 1) throw std::invalid_argument("config: k must be >= 1");
  if (cfg.q < 0) throw std::invalid_argument("config: q must be >= 0");
  if (cfg.snr_db.empty()) throw std::invalid_argument("config: snr_db list is empty");
  const bool zf_based = cfg.algorithm != Algorithm::FpAlt;
  if (zf_based && cfg.u > cfg.n)
    throw std::invalid_argument("config: " + to_string(cfg.algorithm) + " needs u <= n (u=" + std::to_string(cfg.u) +
                                ", n=" + std::to_string(cfg.n) + ")");
  if (cfg.algorithm == Algorithm::Codebook && cfg.codebook_path.empty())
    throw std::invalid_argument("config: algorithm=codebook needs codebook=<path> (train one with train-codebook)");
  if (cfg.algorithm == Algorithm::Hierarchy && cfg.hierarchy_path.empty())
    throw std::invalid_argument("config: algorithm=hierarchy needs hierarchy=<path> (train one with train-hierarchy)");
  if (!(cfg.sigma2 > 0.0)) throw std::invalid_argument("config: sigma2 must be > 0");
}

namespace {

struct TrialOutcome {
  double rate = 0.0;
  double seconds = 0.0;
  double evals = 0.0;
};

struct SweepContext {
  const ExperimentConfig& cfg;
  PortModel model;
  PatternBasis basis;
  FlatCodebook cb;
  HierarchicalCodebook hc;
};

SweepContext make_context(const ExperimentConfig& cfg) {
  SweepContext ctx{cfg, {}, {}, {}, {}};
  if (cfg.algorithm != Algorithm::Conventional) {
    ctx.model = cfg.port_model_path.empty()
                    ? synthesize_surrogate(cfg.q, cfg.k, derive_seed(cfg.seed, {0xA17E77A}))
                    : load_port_model(cfg.port_model_path);
    ctx.basis = reduce_basis(ctx.model, cfg.rank_tol);
    if (cfg.algorithm == Algorithm::Codebook) {
      ctx.cb = load_codebook(cfg.codebook_path);
      if (ctx.cb.q() != ctx.model.q)
        throw std::runtime_error("codebook Q=" + std::to_string(ctx.cb.q()) + " does not match antenna Q=" +
                                 std::to_string(ctx.model.q));
    }
    if (cfg.algorithm == Algorithm::Hierarchy) {
      ctx.hc = load_hierarchy(cfg.hierarchy_path);
      if (ctx.hc.q != ctx.model.q)
        throw std::runtime_error("hierarchy Q=" + std::to_string(ctx.hc.q) + " does not match antenna Q=" +
                                 std::to_string(ctx.model.q));
    }
  }
  return ctx;
}

TrialOutcome run_trial(const SweepContext& ctx, int snr_index, int trial) {
  const ExperimentConfig& cfg = ctx.cfg;
  const double p_budget = std::pow(10.0, cfg.snr_db[static_cast<std::size_t>(snr_index)] / 10.0) * cfg.sigma2;
  auto rng = make_rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(snr_index), static_cast<std::uint64_t>(trial)}));
  const std::uint64_t solver_seed =
      derive_seed(cfg.seed, {static_cast<std::uint64_t>(snr_index), static_cast<std::uint64_t>(trial), 1u});
  const RVec sigma2 = RVec::Constant(cfg.u, cfg.sigma2);

  TrialOutcome out;
  using clock = std::chrono::steady_clock;

  if (cfg.algorithm == Algorithm::Conventional) {
    const CMat rows = complex_normal_matrix(cfg.u, cfg.n, rng);
    const auto t0 = clock::now();
    out.rate = conventional_system_rate(rows, p_budget, sigma2);
    out.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    return out;
  }

  const auto channels = sample_reduced(ctx.basis.n_eff, cfg.n, cfg.u, rng);
  const auto t0 = clock::now();
  switch (cfg.algorithm) {
    case Algorithm::FpAlt: {
      FpConfig fc;
      fc.p_budget = p_budget;
      fc.sigma2 = sigma2;
      fc.max_outer = cfg.fp_max_outer;
      fc.rel_tol = cfg.rel_tol;
      fc.sebo = cfg.sebo;
      fc.seed = solver_seed;
      const FpResult r = fp_alternate(channels, ctx.model, ctx.basis, fc);
      out.rate = r.report.rate_trace.back();
      out.evals = static_cast<double>(r.report.candidate_evals);
      break;
    }
    case Algorithm::ZfAlt: {
      SearchConfig sc{p_budget, sigma2, cfg.max_iters, cfg.rel_tol, solver_seed};
      const SearchResult r = zf_alt_optimize(channels, ctx.model, ctx.basis, sc, cfg.sebo);
      out.rate = r.report.rate_trace.back();
      out.evals = static_cast<double>(r.report.candidate_evals);
      break;
    }
    case Algorithm::Codebook: {
      SearchConfig sc{p_budget, sigma2, cfg.max_iters, cfg.rel_tol, solver_seed};
      const SearchResult r = flat_search_optimize(channels, ctx.cb, ctx.model, ctx.basis, sc);
      out.rate = r.report.rate_trace.back();
      out.evals = static_cast<double>(r.report.candidate_evals);
      break;
    }
    case Algorithm::Hierarchy: {
      SearchConfig sc{p_budget, sigma2, cfg.max_iters, cfg.rel_tol, solver_seed};
      const SearchResult r = hierarchical_search_optimize(channels, ctx.hc, ctx.model, ctx.basis, sc);
      out.rate = r.report.rate_trace.back();
      out.evals = static_cast<double>(r.report.candidate_evals);
      break;
    }
    case Algorithm::Conventional:
      break;
  }
  out.seconds = std::chrono::duration<double>(clock::now() - t0).count();
  return out;
}

}  // namespace

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const SweepContext ctx = make_context(cfg);

  const int points = static_cast<int>(cfg.snr_db.size());
  const int total = points * cfg.trials;
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(total));

  int workers = cfg.workers > 0 ? cfg.workers : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, total));

  std::atomic<int> next{0};
  std::exception_ptr failure = nullptr;
  std::mutex failure_mu;
  auto body = [&]() {
    for (;;) {
      const int task = next.fetch_add(1);
      if (task >= total) return;
      try {
        outcomes[static_cast<std::size_t>(task)] = run_trial(ctx, task / cfg.trials, task % cfg.trials);
      } catch (...) {
        std::lock_guard<std::mutex> lk(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<ResultRow> rows(static_cast<std::size_t>(points));
  for (int si = 0; si < points; ++si) {
    ResultRow& row = rows[static_cast<std::size_t>(si)];
    row.snr_db = cfg.snr_db[static_cast<std::size_t>(si)];
    double sum = 0.0, time_sum = 0.0, eval_sum = 0.0;
    for (int t = 0; t < cfg.trials; ++t) {
      const auto& o = outcomes[static_cast<std::size_t>(si * cfg.trials + t)];
      sum += o.rate;
      time_sum += o.seconds;
      eval_sum += o.evals;
    }
    row.mean_rate = sum / cfg.trials;
    double var = 0.0;
    for (int t = 0; t < cfg.trials; ++t) {
      const double d = outcomes[static_cast<std::size_t>(si * cfg.trials + t)].rate - row.mean_rate;
      var += d * d;
    }
    row.std_err = cfg.trials > 1 ? std::sqrt(var / (cfg.trials - 1) / cfg.trials) : 0.0;
    row.mean_time_s = cfg.timing ? time_sum / cfg.trials : 0.0;
    row.evals = eval_sum / cfg.trials;
  }
  return rows;
}

std::string csv_header() { return "snr_db,mean_rate,stderr,mean_time_s,evals"; }

namespace {
void append_g9(std::string& s, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  s += buf;
}
}  // namespace

std::string csv_string(const std::vector<ResultRow>& rows) {
  std::string s = csv_header();
  s += '\n';
  for (const auto& r : rows) {
    append_g9(s, r.snr_db);
    s += ',';
    append_g9(s, r.mean_rate);
    s += ',';
    append_g9(s, r.std_err);
    s += ',';
    append_g9(s, r.mean_time_s);
    s += ',';
    append_g9(s, r.evals);
    s += '\n';
  }
  return s;
}

void write_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << csv_string(rows);
}

std::string bench_csv(const ExperimentConfig& cfg, const std::vector<Algorithm>& algorithms) {
  std::string s = "algorithm,";
  s += csv_header();
  s += '\n';
  for (Algorithm a : algorithms) {
    ExperimentConfig c = cfg;
    c.algorithm = a;
    c.timing = true;
    const auto rows = run_sweep(c);
    for (const auto& r : rows) {
      s += to_string(a);
      s += ',';
      append_g9(s, r.snr_db);
      s += ',';
      append_g9(s, r.mean_rate);
      s += ',';
      append_g9(s, r.std_err);
      s += ',';
      append_g9(s, r.mean_time_s);
      s += ',';
      append_g9(s, r.evals);
      s += '\n';
    }
  }
  return s;
}

LloydDiagnostics train_codebook_cmd(const ExperimentConfig& cfg, const std::string& out_path) {
  const PortModel model = cfg.port_model_path.empty()
                              ? synthesize_surrogate(cfg.q, cfg.k, derive_seed(cfg.seed, {0xA17E77A}))
                              : load_port_model(cfg.port_model_path);
  const PatternBasis basis = reduce_basis(model, cfg.rank_tol);
  auto rng = make_rng(derive_seed(cfg.seed, {0x7241u}));
  const TrainingSet ts = make_training_set(basis.n_eff, cfg.n, cfg.u, cfg.training_samples, rng);
  LloydDiagnostics diag;
  const FlatCodebook cb =
      lloyd_train(ts, cfg.d_bits, cfg.rho_bar, cfg.sebo, derive_seed(cfg.seed, {0x7242u}), model, basis, &diag);
  save_codebook(out_path, cb);
  return diag;
}

HierarchyBuildDiagnostics train_hierarchy_cmd(const ExperimentConfig& cfg, const std::string& out_path) {
  const PortModel model = cfg.port_model_path.empty()
                              ? synthesize_surrogate(cfg.q, cfg.k, derive_seed(cfg.seed, {0xA17E77A}))
                              : load_port_model(cfg.port_model_path);
  const PatternBasis basis = reduce_basis(model, cfg.rank_tol);
  auto rng = make_rng(derive_seed(cfg.seed, {0x7241u}));
  const TrainingSet ts = make_training_set(basis.n_eff, cfg.n, cfg.u, cfg.training_samples, rng);
  HierarchyBuildDiagnostics diag;
  const HierarchicalCodebook hc = build_hierarchy(ts, cfg.branching, cfg.layers, cfg.rho_bar, cfg.sebo,
                                                  derive_seed(cfg.seed, {0x7243u}), model, basis, &diag);
  save_hierarchy(out_path, hc);
  return diag;
}

}  // namespace pixsim
