#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "pixsim/rng.hpp"
#include "pixsim/sebo.hpp"

using namespace pixsim;

namespace {

AntennaCoder coder_from_index(int q, unsigned idx) {
  AntennaCoder b = AntennaCoder::zeros(q);
  for (int j = 0; j < q; ++j) b.bits[static_cast<std::size_t>(j)] = (idx >> j) & 1u;
  return b;
}

// random quadratic pseudo-boolean objective: c' x + x' M x
struct RandomQuadratic {
  RVec lin;
  RMat quad;
  double operator()(const AntennaCoder& b) const {
    const int q = b.size();
    double v = 0.0;
    for (int i = 0; i < q; ++i) {
      if (!b.bits[static_cast<std::size_t>(i)]) continue;
      v += lin(i);
      for (int j = 0; j < q; ++j)
        if (b.bits[static_cast<std::size_t>(j)]) v += quad(i, j);
    }
    return v;
  }
};

RandomQuadratic random_quadratic(int q, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  RandomQuadratic f;
  f.lin = RVec::NullaryExpr(q, [&](Eigen::Index) { return d(rng); });
  f.quad = RMat::NullaryExpr(q, q, [&](Eigen::Index, Eigen::Index) { return d(rng); });
  return f;
}

double brute_force_max(const BinaryObjective& f, int q) {
  double best = -1e300;
  for (unsigned idx = 0; idx < (1u << q); ++idx) best = std::max(best, f(coder_from_index(q, idx)));
  return best;
}

}  // namespace

TEST_CASE("single full-width block equals global enumeration") {
  auto rng = make_rng(1);
  for (int inst = 0; inst < 20; ++inst) {
    const int q = 6;
    auto f = random_quadratic(q, rng);
    BinaryObjective obj = [&](const AntennaCoder& b) { return f(b); };
    SeboConfig cfg;
    cfg.block_size = q;
    cfg.seed = 100 + static_cast<std::uint64_t>(inst);
    const SeboResult res = sebo_maximize(obj, q, cfg);
    CHECK(res.value == brute_force_max(obj, q));
  }
}

TEST_CASE("oracle equivalence up to q=12 with j=q") {
  auto rng = make_rng(2);
  for (int q : {8, 10, 12}) {
    auto f = random_quadratic(q, rng);
    BinaryObjective obj = [&](const AntennaCoder& b) { return f(b); };
    SeboConfig cfg;
    cfg.block_size = q;
    cfg.seed = static_cast<std::uint64_t>(q);
    const SeboResult res = sebo_maximize(obj, q, cfg);
    CHECK(res.value == brute_force_max(obj, q));
  }
}

TEST_CASE("constant objective returns the initialization unchanged") {
  BinaryObjective obj = [](const AntennaCoder&) { return 4.25; };
  SeboConfig cfg;
  cfg.block_size = 3;
  const AntennaCoder start{1, 0, 1, 1, 0, 0, 1};
  const SeboResult res = sebo_maximize(obj, 7, cfg, &start);
  CHECK(res.best == start);
  CHECK(res.value == 4.25);
  for (double v : res.trace.values) CHECK(v == 4.25);
}

TEST_CASE("blocked search improves and keeps a monotone trace") {
  auto rng = make_rng(3);
  for (int inst = 0; inst < 10; ++inst) {
    const int q = 10;
    auto f = random_quadratic(q, rng);
    BinaryObjective obj = [&](const AntennaCoder& b) { return f(b); };
    SeboConfig cfg;
    cfg.block_size = 2;
    cfg.seed = static_cast<std::uint64_t>(inst);
    const AntennaCoder start = coder_from_index(q, 0x155);
    const double f0 = obj(start);
    const SeboResult res = sebo_maximize(obj, q, cfg, &start);
    CHECK(res.value >= f0);
    for (std::size_t i = 1; i < res.trace.values.size(); ++i)
      CHECK(res.trace.values[i] >= res.trace.values[i - 1]);
  }
}

TEST_CASE("last block may be shorter than j") {
  auto rng = make_rng(4);
  const int q = 7;
  auto f = random_quadratic(q, rng);
  BinaryObjective obj = [&](const AntennaCoder& b) { return f(b); };
  SeboConfig cfg;
  cfg.block_size = 4;  // blocks of 4 and 3
  const SeboResult res = sebo_maximize(obj, q, cfg);
  CHECK(res.best.size() == q);
  CHECK(res.value >= obj(AntennaCoder::zeros(q)));
}

TEST_CASE("evaluation budget accounting") {
  auto rng = make_rng(5);
  const int q = 9, j = 3;
  auto f = random_quadratic(q, rng);
  std::size_t calls = 0;
  BinaryObjective obj = [&](const AntennaCoder& b) {
    ++calls;
    return f(b);
  };
  SeboConfig cfg;
  cfg.block_size = j;
  cfg.max_cycles = 20;
  cfg.flip_rounds = 10;
  const SeboResult res = sebo_maximize(obj, q, cfg);
  CHECK(res.trace.evaluations == calls);
  const std::size_t blocks = (q + j - 1) / j;
  const std::size_t cycle_cost = static_cast<std::size_t>(cfg.max_cycles) * blocks * (1u << j);
  const std::size_t bound = 1 + cycle_cost + static_cast<std::size_t>(cfg.flip_rounds) * (1 + cycle_cost);
  CHECK(res.trace.evaluations <= bound);
}

TEST_CASE("ties keep the incumbent") {
  // objective depends only on bit 0; bits 1..3 are plateaus
  BinaryObjective obj = [](const AntennaCoder& b) { return b.bits[0] ? 1.0 : 0.0; };
  SeboConfig cfg;
  cfg.block_size = 2;
  cfg.flip_rounds = 0;
  const AntennaCoder start{0, 1, 0, 1};
  const SeboResult res = sebo_maximize(obj, 4, cfg, &start);
  CHECK(res.value == 1.0);
  CHECK(res.best.bits[0] == 1);
  // plateau bits untouched
  CHECK(res.best.bits[2] == 0);
  CHECK(res.best.bits[3] == 1);
}
