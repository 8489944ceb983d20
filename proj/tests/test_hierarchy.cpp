#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "pixsim/beamspace.hpp"
#include "pixsim/hierarchy.hpp"
#include "pixsim/rng.hpp"

using namespace pixsim;

namespace {

TrainingSet small_training_set(const PatternBasis& basis, int n, int users, int count, std::uint64_t seed) {
  auto rng = make_rng(seed);
  TrainingSet ts;
  ts.users = users;
  ts.n = n;
  for (int s = 0; s < count; ++s) ts.samples.push_back(complex_normal_matrix(basis.n_eff, n * users, rng));
  return ts;
}

}  // namespace

TEST_CASE("tree link rule and child tiling") {
  CHECK(HierarchicalCodebook::child_index(3, 3, 1) == 7);  // codeword (l,3,1) -> sub-codebook 7 one layer down
  CHECK(HierarchicalCodebook::child_index(3, 1, 1) == 1);
  CHECK(HierarchicalCodebook::child_index(2, 4, 2) == 8);

  // children {A(i-1)+1..iA} tile 1..A^l without overlap
  const int a = 3, parents = 9;
  std::vector<int> hit(static_cast<std::size_t>(a * parents), 0);
  for (int i = 1; i <= parents; ++i)
    for (int slot = 1; slot <= a; ++slot) ++hit[static_cast<std::size_t>(HierarchicalCodebook::child_index(a, i, slot) - 1)];
  for (int v : hit) CHECK(v == 1);
}

TEST_CASE("single-layer build equals flat lloyd training with M=A") {
  const PortModel model = synthesize_surrogate(5, 5, 12);
  const PatternBasis basis = reduce_basis(model, 1e-6);
  const TrainingSet ts = small_training_set(basis, 2, 2, 40, 3);

  SeboConfig scfg;
  scfg.block_size = 3;
  const std::uint64_t seed = 99;
  const HierarchicalCodebook hc = build_hierarchy(ts, 3, 1, 10.0, scfg, seed, model, basis);
  REQUIRE(hc.layers.size() == 1);
  REQUIRE(hc.layers[0].size() == 3);

  PatternTable table(basis, model);
  const FlatCodebook cb = lloyd_train_m(ts, {}, 3, 10.0, scfg, derive_seed(seed, {1u, 0u}), table);
  for (int i = 0; i < 3; ++i) CHECK(hc.layers[0][static_cast<std::size_t>(i)] == cb.codewords[static_cast<std::size_t>(i)]);
}

TEST_CASE("children partition their parent's training set exactly") {
  const PortModel model = synthesize_surrogate(6, 5, 41);
  const PatternBasis basis = reduce_basis(model, 1e-6);
  const TrainingSet ts = small_training_set(basis, 2, 2, 50, 5);

  SeboConfig scfg;
  scfg.block_size = 3;
  HierarchyBuildDiagnostics diag;
  const HierarchicalCodebook hc = build_hierarchy(ts, 2, 3, 10.0, scfg, 7, model, basis, &diag);
  REQUIRE(hc.layers.size() == 3);
  REQUIRE(diag.partition_sizes.size() == 3);
  REQUIRE(diag.partition_sizes[0].size() == 1);
  CHECK(diag.partition_sizes[0][0] == 50);

  for (std::size_t layer = 1; layer < diag.partition_sizes.size(); ++layer) {
    const auto& parents = diag.partition_sizes[layer - 1];
    const auto& children = diag.partition_sizes[layer];
    REQUIRE(children.size() == parents.size() * 2);
    int total = 0;
    for (std::size_t i = 0; i < parents.size(); ++i) {
      const int sum = children[2 * i] + children[2 * i + 1];
      CHECK(sum == parents[i]);
      total += sum;
    }
    CHECK(total == 50);
  }
}

TEST_CASE("hierarchy file round trip") {
  const PortModel model = synthesize_surrogate(4, 4, 3);
  const PatternBasis basis = reduce_basis(model, 1e-6);
  const TrainingSet ts = small_training_set(basis, 2, 2, 20, 1);
  SeboConfig scfg;
  scfg.block_size = 2;
  const HierarchicalCodebook hc = build_hierarchy(ts, 2, 2, 10.0, scfg, 11, model, basis);

  const std::string path = "pixsim_test_hc.txt";
  save_hierarchy(path, hc);
  const HierarchicalCodebook r = load_hierarchy(path);
  CHECK(r.q == hc.q);
  CHECK(r.branching == hc.branching);
  CHECK(r.layer_count == hc.layer_count);
  REQUIRE(r.layers.size() == hc.layers.size());
  for (std::size_t l = 0; l < r.layers.size(); ++l) {
    REQUIRE(r.layers[l].size() == hc.layers[l].size());
    for (std::size_t i = 0; i < r.layers[l].size(); ++i) CHECK(r.layers[l][i] == hc.layers[l][i]);
  }
  std::remove(path.c_str());
}

TEST_CASE("degenerate single-layer search reproduces flat search bit for bit") {
  const PortModel model = synthesize_surrogate(6, 6, 61);
  const PatternBasis basis = reduce_basis(model, 1e-6);
  const TrainingSet ts = small_training_set(basis, 2, 2, 30, 2);
  SeboConfig scfg;
  scfg.block_size = 3;
  const HierarchicalCodebook hc = build_hierarchy(ts, 3, 1, 10.0, scfg, 17, model, basis);

  FlatCodebook root;
  root.codewords = hc.layers[0];

  auto rng = make_rng(8);
  const auto channels = sample_reduced(basis.n_eff, 2, 2, rng);
  SearchConfig cfg;
  cfg.p_budget = 6.0;
  cfg.seed = 12345;

  const SearchResult flat = flat_search_optimize(channels, root, model, basis, cfg);
  const SearchResult hier = hierarchical_search_optimize(channels, hc, model, basis, cfg);

  REQUIRE(flat.coders.size() == hier.coders.size());
  for (std::size_t u = 0; u < flat.coders.size(); ++u) CHECK(flat.coders[u] == hier.coders[u]);
  CHECK((flat.precoder - hier.precoder).norm() == 0.0);
  REQUIRE(flat.report.rate_trace.size() == hier.report.rate_trace.size());
  for (std::size_t i = 0; i < flat.report.rate_trace.size(); ++i)
    CHECK(flat.report.rate_trace[i] == hier.report.rate_trace[i]);
  CHECK(flat.report.candidate_evals == hier.report.candidate_evals);
}

TEST_CASE("hierarchical search: exact A*L evaluation count and monotone objective") {
  const PortModel model = synthesize_surrogate(6, 6, 29);
  const PatternBasis basis = reduce_basis(model, 1e-6);
  const TrainingSet ts = small_training_set(basis, 2, 2, 60, 13);
  SeboConfig scfg;
  scfg.block_size = 3;
  const int a = 3, l = 2;
  const HierarchicalCodebook hc = build_hierarchy(ts, a, l, 10.0, scfg, 23, model, basis);

  auto rng = make_rng(14);
  const auto channels = sample_reduced(basis.n_eff, 2, 2, rng);
  SearchConfig cfg;
  cfg.p_budget = 10.0;
  cfg.seed = 77;
  const SearchResult res = hierarchical_search_optimize(channels, hc, model, basis, cfg);

  CHECK(res.report.candidate_evals == static_cast<long long>(a) * l * 2 * res.report.iterations);
  for (std::size_t i = 1; i < res.report.objective_trace.size(); ++i)
    CHECK(res.report.objective_trace[i] >= res.report.objective_trace[i - 1] - 1e-9);
  CHECK(res.report.min_trace_delta >= -1e-9);

  // chosen coders are leaf-layer codewords
  for (const auto& b : res.coders) {
    bool found = false;
    for (const auto& c : hc.layers.back()) found |= (b == c);
    CHECK(found);
  }
}

TEST_CASE("layer-L selection refines layer-1 selection on average") {
  const PortModel model = synthesize_surrogate(6, 6, 83);
  const PatternBasis basis = reduce_basis(model, 1e-6);
  const TrainingSet ts = small_training_set(basis, 2, 2, 80, 19);
  SeboConfig scfg;
  scfg.block_size = 3;
  const HierarchicalCodebook hc = build_hierarchy(ts, 2, 3, 10.0, scfg, 29, model, basis);

  HierarchicalCodebook root_only;
  root_only.q = hc.q;
  root_only.branching = hc.branching;
  root_only.layer_count = 1;
  root_only.layers = {hc.layers[0]};

  const int trials = 200;
  double sum_deep = 0.0, sum_root = 0.0, sumsq_diff = 0.0;
  for (int t = 0; t < trials; ++t) {
    auto rng = make_rng(derive_seed(5000, {static_cast<std::uint64_t>(t)}));
    const auto channels = sample_reduced(basis.n_eff, 2, 2, rng);
    SearchConfig cfg;
    cfg.p_budget = 10.0;
    cfg.seed = derive_seed(6000, {static_cast<std::uint64_t>(t)});
    const double deep = hierarchical_search_optimize(channels, hc, model, basis, cfg).report.rate_trace.back();
    const double root = hierarchical_search_optimize(channels, root_only, model, basis, cfg).report.rate_trace.back();
    sum_deep += deep;
    sum_root += root;
    const double d = deep - root;
    sumsq_diff += d * d;
  }
  const double mean_diff = (sum_deep - sum_root) / trials;
  const double var_diff = sumsq_diff / trials - mean_diff * mean_diff;
  const double se = std::sqrt(std::max(var_diff, 0.0) / trials);
  CHECK(mean_diff >= -se);
}
