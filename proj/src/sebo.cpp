#include "pixsim/sebo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "pixsim/rng.hpp"

namespace pixsim {

namespace {

// Exhaustively re-optimizes bits [lo, lo+len) in place. Keeps the incumbent
// unless some setting is strictly better; among strict improvers the first
// in enumeration order wins. Returns the (possibly unchanged) objective.
double optimize_block(const BinaryObjective& f, AntennaCoder& b, int lo, int len, double f_cur, SeboTrace& trace) {
  std::vector<std::uint8_t> incumbent(b.bits.begin() + lo, b.bits.begin() + lo + len);
  double best = f_cur;
  std::uint32_t best_pattern = 0;
  bool improved = false;

  const std::uint32_t count = 1u << len;
  for (std::uint32_t pat = 0; pat < count; ++pat) {
    bool is_incumbent = true;
    for (int j = 0; j < len; ++j) {
      const std::uint8_t bit = (pat >> j) & 1u;
      b.bits[static_cast<std::size_t>(lo + j)] = bit;
      if (bit != incumbent[static_cast<std::size_t>(j)]) is_incumbent = false;
    }
    if (is_incumbent) continue;  // value already known
    const double v = f(b);
    ++trace.evaluations;
    if (v > best) {
      best = v;
      best_pattern = pat;
      improved = true;
    }
  }

  for (int j = 0; j < len; ++j)
    b.bits[static_cast<std::size_t>(lo + j)] =
        improved ? static_cast<std::uint8_t>((best_pattern >> j) & 1u) : incumbent[static_cast<std::size_t>(j)];
  return best;
}

// Cycles block passes until a pass yields no meaningful improvement.
double cycle_blocks(const BinaryObjective& f, AntennaCoder& b, int q, const SeboConfig& cfg, double f_cur,
                    SeboTrace& trace) {
  const int j = std::min(cfg.block_size, q);
  const int blocks = (q + j - 1) / j;
  for (int cycle = 0; cycle < cfg.max_cycles; ++cycle) {
    const double before = f_cur;
    for (int blk = 0; blk < blocks; ++blk) {
      const int lo = blk * j;
      const int len = std::min(j, q - lo);
      f_cur = optimize_block(f, b, lo, len, f_cur, trace);
      trace.values.push_back(f_cur);
    }
    if (f_cur - before <= cfg.rel_tol * std::max(1.0, std::abs(before))) return f_cur;
    if (cycle == cfg.max_cycles - 1) trace.budget_exhausted = true;
  }
  return f_cur;
}

}  // namespace

SeboResult sebo_maximize(const BinaryObjective& f, int q, const SeboConfig& cfg, const AntennaCoder* start) {
  if (q < 1) throw std::invalid_argument("sebo_maximize: q must be >= 1");
  if (cfg.block_size < 1 || cfg.max_cycles < 1) throw std::invalid_argument("sebo_maximize: bad config");

  SeboResult res;
  res.best = start ? *start : AntennaCoder::zeros(q);
  if (res.best.size() != q) throw std::invalid_argument("sebo_maximize: start coder has wrong length");

  res.value = f(res.best);
  ++res.trace.evaluations;
  res.trace.values.push_back(res.value);

  res.value = cycle_blocks(f, res.best, q, cfg, res.value, res.trace);

  const int j = std::min(cfg.block_size, q);
  auto rng = make_rng(cfg.seed);
  for (int round = 0; round < cfg.flip_rounds; ++round) {
    AntennaCoder cand = res.best;
    std::uniform_int_distribution<int> flips_dist(1, j);
    const int flips = flips_dist(rng);
    // positions uniform without replacement
    std::vector<int> idx(static_cast<std::size_t>(q));
    for (int i = 0; i < q; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (int t = 0; t < flips; ++t) {
      std::uniform_int_distribution<int> pick(t, q - 1);
      std::swap(idx[static_cast<std::size_t>(t)], idx[static_cast<std::size_t>(pick(rng))]);
      cand.bits[static_cast<std::size_t>(idx[static_cast<std::size_t>(t)])] ^= 1u;
    }
    const double v = f(cand);
    ++res.trace.evaluations;
    if (v > res.value) {
      res.best = std::move(cand);
      res.value = v;
      res.trace.values.push_back(res.value);
      res.value = cycle_blocks(f, res.best, q, cfg, res.value, res.trace);
    }
  }
  return res;
}

}  // namespace pixsim
