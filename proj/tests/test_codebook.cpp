#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "pixsim/beamspace.hpp"
#include "pixsim/codebook.hpp"
#include "pixsim/rng.hpp"

using namespace pixsim;

namespace {

AntennaCoder coder_from_index(int q, unsigned idx) {
  AntennaCoder b = AntennaCoder::zeros(q);
  for (int j = 0; j < q; ++j) b.bits[static_cast<std::size_t>(j)] = (idx >> j) & 1u;
  return b;
}

}  // namespace

TEST_CASE("zf precoder: identity channel") {
  const double budget = 8.0;
  const CMat p = zf_precoder(CMat::Identity(2, 2), budget);
  CHECK((p - std::sqrt(budget / 2.0) * CMat::Identity(2, 2)).norm() <= 1e-12);
}

TEST_CASE("zf precoder: nulling, column power, rank guard") {
  auto rng = make_rng(44);
  const double budget = 3.0;
  const CMat h = complex_normal_matrix(2, 4, rng);
  const CMat p = zf_precoder(h, budget);

  for (int u = 0; u < 2; ++u) {
    CHECK(p.col(u).norm() == doctest::Approx(std::sqrt(budget / 2.0)).epsilon(1e-12));
    for (int j = 0; j < 2; ++j) {
      if (j == u) continue;
      cxd leak(0, 0);
      for (int c = 0; c < 4; ++c) leak += h(j, c) * p(c, u);
      CHECK(std::abs(leak) < 1e-10 * std::sqrt(budget));
    }
  }

  CMat bad(2, 4);
  bad.row(0) = h.row(0);
  bad.row(1) = h.row(0);  // colliding effective channels
  CHECK_THROWS_WITH_AS(zf_precoder(bad, budget), doctest::Contains("rank-deficient"), std::runtime_error);
}

TEST_CASE("training metric: limits and single-user reduction") {
  const PortModel model = synthesize_surrogate(4, 6, 10);
  const PatternBasis basis = reduce_basis(model, 1e-6);
  PatternTable table(basis, model);
  auto rng = make_rng(2);

  TrainingSet ts;
  ts.users = 1;
  ts.n = 2;
  ts.samples.push_back(complex_normal_matrix(basis.n_eff, 2, rng));

  const AntennaCoder c{1, 0, 1, 0};
  // vanishing training SNR -> metric -> 0
  CHECK(training_metric(ts, 0, c, 1e-14, table) == doctest::Approx(0.0).epsilon(1e-10));

  // single user: log2(1 + rho * ||w^H Hbar||^2)
  const CVec h = effective_channel(table.get(c), ts.user_block(0, 0));
  const double rho = 10.0;
  CHECK(training_metric(ts, 0, c, rho, table) ==
        doctest::Approx(std::log2(1.0 + rho * h.squaredNorm())).epsilon(1e-12));
}

TEST_CASE("training metric: two-user pipeline oracle") {
  const PortModel model = synthesize_surrogate(5, 8, 20);
  const PatternBasis basis = reduce_basis(model, 1e-6);
  PatternTable table(basis, model);
  auto rng = make_rng(3);

  TrainingSet ts;
  ts.users = 2;
  ts.n = 3;
  ts.samples.push_back(complex_normal_matrix(basis.n_eff, 6, rng));

  const AntennaCoder c{0, 1, 1, 0, 1};
  const double rho = 5.0;
  const double metric = training_metric(ts, 0, c, rho, table);

  // step-by-step: pattern coder -> effective channels -> unit ZF -> rate
  const CVec w = pattern_coder(basis, model, c);
  std::vector<CVec> rows(2);
  rows[0] = effective_channel(w, ts.user_block(0, 0));
  rows[1] = effective_channel(w, ts.user_block(0, 1));
  CMat h(2, 3);
  h.row(0) = rows[0].transpose();
  h.row(1) = rows[1].transpose();
  const CMat raw = h.adjoint() * (h * h.adjoint()).inverse();
  double expect = 0.0;
  for (int u = 0; u < 2; ++u) {
    const CVec dir = raw.col(u) / raw.col(u).norm();
    cxd g(0, 0);
    for (int i = 0; i < 3; ++i) g += rows[static_cast<std::size_t>(u)](i) * dir(i);
    expect += std::log2(1.0 + rho * std::norm(g));
  }
  CHECK(metric == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("lloyd: one-cell codebook equals the global centroid") {
  const PortModel model = synthesize_surrogate(4, 4, 30);
  const PatternBasis basis = reduce_basis(model, 1e-6);
  auto rng = make_rng(4);
  PatternTable table(basis, model);

  TrainingSet ts;
  ts.users = 2;
  ts.n = 2;
  for (int s = 0; s < 12; ++s) ts.samples.push_back(complex_normal_matrix(basis.n_eff, 4, rng));

  SeboConfig scfg;
  scfg.block_size = 4;  // exhaustive
  LloydDiagnostics diag;
  const FlatCodebook cb = lloyd_train(ts, 0, 10.0, scfg, 9, model, basis, &diag);
  REQUIRE(cb.size() == 1);

  auto mean_metric = [&](const AntennaCoder& c) {
    double acc = 0.0;
    for (int s = 0; s < ts.size(); ++s) acc += training_metric(ts, s, c, 10.0, table);
    return acc / ts.size();
  };
  double best = -std::numeric_limits<double>::infinity();
  for (unsigned idx = 0; idx < 16; ++idx) best = std::max(best, mean_metric(coder_from_index(4, idx)));
  CHECK(mean_metric(cb.codewords[0]) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("lloyd: objective trace is non-decreasing") {
  const PortModel model = synthesize_surrogate(6, 6, 55);
  const PatternBasis basis = reduce_basis(model, 1e-6);
  auto rng = make_rng(5);

  TrainingSet ts;
  ts.users = 2;
  ts.n = 2;
  for (int s = 0; s < 60; ++s) ts.samples.push_back(complex_normal_matrix(basis.n_eff, 4, rng));

  SeboConfig scfg;
  scfg.block_size = 3;
  LloydDiagnostics diag;
  lloyd_train(ts, 2, 10.0, scfg, 21, model, basis, &diag);
  REQUIRE(diag.objective_trace.size() >= 2);
  for (std::size_t i = 1; i < diag.objective_trace.size(); ++i)
    CHECK(diag.objective_trace[i] >= diag.objective_trace[i - 1] - 1e-12);
  CHECK(diag.rounds >= 1);
}

TEST_CASE("lloyd: exhaustive-centroid mode reaches per-sample optimality at M=2^Q") {
  const PortModel model = synthesize_surrogate(4, 6, 71);
  const PatternBasis basis = reduce_basis(model, 1e-6);
  auto rng = make_rng(6);
  PatternTable table(basis, model);

  TrainingSet ts;
  ts.users = 2;
  ts.n = 2;
  for (int s = 0; s < 30; ++s) ts.samples.push_back(complex_normal_matrix(basis.n_eff, 4, rng));

  SeboConfig scfg;
  scfg.block_size = 4;  // exhaustive centroids
  const FlatCodebook cb = lloyd_train(ts, 4, 10.0, scfg, 33, model, basis);  // M = 16 = 2^Q
  REQUIRE(cb.size() == 16);

  for (int s = 0; s < ts.size(); ++s) {
    double global_best = -std::numeric_limits<double>::infinity();
    for (unsigned idx = 0; idx < 16; ++idx)
      global_best = std::max(global_best, training_metric(ts, s, coder_from_index(4, idx), 10.0, table));
    double in_book = -std::numeric_limits<double>::infinity();
    for (const auto& c : cb.codewords) in_book = std::max(in_book, training_metric(ts, s, c, 10.0, table));
    CHECK(in_book == doctest::Approx(global_best).epsilon(1e-12));
  }
}

TEST_CASE("codebook file round trip is bit-exact") {
  FlatCodebook cb;
  cb.codewords = {AntennaCoder{1, 0, 1, 1, 0}, AntennaCoder{0, 0, 0, 0, 0}, AntennaCoder{1, 1, 1, 1, 1}};
  const std::string path = "pixsim_test_cb.txt";
  save_codebook(path, cb);
  const FlatCodebook r = load_codebook(path);
  REQUIRE(r.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(r.codewords[static_cast<std::size_t>(i)] == cb.codewords[static_cast<std::size_t>(i)]);

  // byte-identical on re-save
  std::ifstream f1(path);
  std::stringstream s1;
  s1 << f1.rdbuf();
  save_codebook(path, r);
  std::ifstream f2(path);
  std::stringstream s2;
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());
  std::remove(path.c_str());
}

TEST_CASE("flat search: single-codeword codebook") {
  const PortModel model = synthesize_surrogate(4, 4, 90);
  const PatternBasis basis = reduce_basis(model, 1e-6);
  auto rng = make_rng(7);
  const auto channels = sample_reduced(basis.n_eff, 2, 2, rng);

  FlatCodebook cb;
  cb.codewords = {AntennaCoder{1, 0, 0, 1}};
  SearchConfig cfg;
  cfg.p_budget = 2.0;
  cfg.seed = 5;
  const SearchResult res = flat_search_optimize(channels, cb, model, basis, cfg);
  CHECK(res.coders[0] == cb.codewords[0]);
  CHECK(res.coders[1] == cb.codewords[0]);
  CHECK(res.report.iterations <= 2);
}

TEST_CASE("flat search: attains the rate of any codeword it contains (single user)") {
  const PortModel model = synthesize_surrogate(5, 6, 17);
  const PatternBasis basis = reduce_basis(model, 1e-6);
  auto rng = make_rng(8);
  const auto channels = sample_reduced(basis.n_eff, 2, 1, rng);
  PatternTable table(basis, model);

  // global best coder by enumeration
  double best_rate = -1.0;
  AntennaCoder best;
  const double budget = 5.0;
  for (unsigned idx = 0; idx < 32; ++idx) {
    const AntennaCoder b = coder_from_index(5, idx);
    const CVec h = effective_channel(table.get(b), channels[0].h_bar);
    const double r = std::log2(1.0 + budget * h.squaredNorm());
    if (r > best_rate) {
      best_rate = r;
      best = b;
    }
  }

  FlatCodebook cb;
  cb.codewords = {AntennaCoder{0, 0, 0, 0, 0}, best, AntennaCoder{1, 1, 1, 1, 1}};
  SearchConfig cfg;
  cfg.p_budget = budget;
  cfg.seed = 11;
  const SearchResult res = flat_search_optimize(channels, cb, model, basis, cfg);
  CHECK(res.report.rate_trace.back() >= best_rate - 1e-9);
  CHECK(res.coders[0] == best);
}

TEST_CASE("flat search: objective non-decreasing across user updates, exact eval counts") {
  const PortModel model = synthesize_surrogate(6, 6, 23);
  const PatternBasis basis = reduce_basis(model, 1e-6);
  auto rng = make_rng(9);
  const auto channels = sample_reduced(basis.n_eff, 3, 3, rng);

  FlatCodebook cb;
  for (unsigned idx = 0; idx < 8; ++idx) cb.codewords.push_back(coder_from_index(6, idx * 7 % 64));
  SearchConfig cfg;
  cfg.p_budget = 10.0;
  cfg.seed = 3;
  const SearchResult res = flat_search_optimize(channels, cb, model, basis, cfg);

  for (std::size_t i = 1; i < res.report.objective_trace.size(); ++i)
    CHECK(res.report.objective_trace[i] >= res.report.objective_trace[i - 1] - 1e-9);
  CHECK(res.report.min_trace_delta >= -1e-9);
  // exactly U*M candidate evaluations per outer iteration
  CHECK(res.report.candidate_evals == static_cast<long long>(3) * 8 * res.report.iterations);
  // coders stay inside the codebook
  for (const auto& b : res.coders) {
    bool found = false;
    for (const auto& c : cb.codewords) found |= (b == c);
    CHECK(found);
  }
}
