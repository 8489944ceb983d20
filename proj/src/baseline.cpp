#include "pixsim/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pixsim/beamspace.hpp"
#include "pixsim/kernels.hpp"
#include "pixsim/rng.hpp"

namespace pixsim {

PowerAllocation water_fill(const RVec& gains, double p_budget) {
  const Eigen::Index n = gains.size();
  if (n == 0) throw std::invalid_argument("water_fill: no channels");
  if (!(p_budget > 0.0)) throw std::invalid_argument("water_fill: budget must be > 0");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(gains(i) > 0.0)) throw std::invalid_argument("water_fill: gains must be > 0");

  RVec inv = gains.cwiseInverse();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return inv(a) < inv(b); });

  // fund the k cheapest channels; the largest k whose water level clears them all
  double level = 0.0;
  int funded = 0;
  double inv_sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    inv_sum += inv(order[static_cast<std::size_t>(k - 1)]);
    const double mu = (p_budget + inv_sum) / k;
    if (mu > inv(order[static_cast<std::size_t>(k - 1)])) {
      level = mu;
      funded = k;
    }
  }
  PowerAllocation out;
  out.level = level;
  out.powers = RVec::Zero(n);
  for (int k = 0; k < funded; ++k) {
    const int i = order[static_cast<std::size_t>(k)];
    out.powers(i) = level - inv(i);
  }
  return out;
}

double conventional_system_rate(const CMat& channel_rows, double p_budget, const RVec& sigma2) {
  const int users = static_cast<int>(channel_rows.rows());
  if (users > channel_rows.cols()) throw std::invalid_argument("conventional_system_rate: needs U <= N");
  const RVec s2 = detail::checked_sigma2(sigma2, users);

  std::vector<CVec> rows(static_cast<std::size_t>(users));
  for (int u = 0; u < users; ++u) rows[static_cast<std::size_t>(u)] = channel_rows.row(u).transpose();
  CMat dirs;
  if (!try_zf_directions(rows, dirs))
    throw std::runtime_error("conventional_system_rate: rank-deficient stacked channel");

  RVec gains(users);
  for (int u = 0; u < users; ++u) {
    const CVec& h = rows[static_cast<std::size_t>(u)];
    const cxd g = kern::cdotu(static_cast<std::size_t>(h.size()), h.data(), dirs.col(u).data());
    gains(u) = std::norm(g) / s2(u);
  }
  const PowerAllocation alloc = water_fill(gains, p_budget);
  double rate = 0.0;
  for (int u = 0; u < users; ++u) rate += std::log2(1.0 + alloc.powers(u) * gains(u));
  return rate;
}

SearchResult zf_alt_optimize(const std::vector<ReducedChannel>& channels, const PortModel& model,
                             const PatternBasis& basis, const SearchConfig& cfg, const SeboConfig& sebo_cfg) {
  const int users = static_cast<int>(channels.size());
  if (users < 1) throw std::invalid_argument("zf_alt_optimize: no users");
  if (users > channels[0].h_bar.cols()) throw std::invalid_argument("zf_alt_optimize: needs U <= N");

  PatternTable table(basis, model);
  detail::SearchState st;
  st.channels = &channels;
  st.sigma2 = detail::checked_sigma2(cfg.sigma2, users);
  st.p_budget = cfg.p_budget;
  st.h_star.resize(static_cast<std::size_t>(users));

  std::vector<AntennaCoder> coders(static_cast<std::size_t>(users), AntennaCoder::zeros(model.q));
  for (int u = 0; u < users; ++u)
    st.h_star[static_cast<std::size_t>(u)] =
        effective_channel(table.get(coders[static_cast<std::size_t>(u)]), channels[static_cast<std::size_t>(u)].h_bar);

  SearchResult res;
  SolveReport& rep = res.report;
  rep.min_trace_delta = std::numeric_limits<double>::infinity();

  CMat p;
  double rate = st.current_zf(p) ? sum_rate_from_heff(st.h_star, p, st.sigma2) : -std::numeric_limits<double>::infinity();
  rep.rate_trace.push_back(rate);

  bool converged = false;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    for (int u = 0; u < users; ++u) {
      auto f = [&](const AntennaCoder& b) {
        const CVec h_cand = effective_channel(table.get(b), channels[static_cast<std::size_t>(u)].h_bar);
        return st.evaluate_candidate(u, h_cand, nullptr);
      };
      SeboConfig scfg = sebo_cfg;
      scfg.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(iter), static_cast<std::uint64_t>(u)});
      SeboResult best = sebo_maximize(f, model.q, scfg, &coders[static_cast<std::size_t>(u)]);
      if (!std::isfinite(best.value))
        throw std::runtime_error("zf_alt_optimize: all coder candidates rank-deficient for user " + std::to_string(u));
      coders[static_cast<std::size_t>(u)] = std::move(best.best);
      rep.objective_trace.push_back(best.value);
      st.h_star[static_cast<std::size_t>(u)] =
          effective_channel(table.get(coders[static_cast<std::size_t>(u)]), channels[static_cast<std::size_t>(u)].h_bar);
      if (!st.current_zf(p)) throw std::runtime_error("zf_alt_optimize: ZF failed after coder update");
    }
    const double next = sum_rate_from_heff(st.h_star, p, st.sigma2);
    rep.rate_trace.push_back(next);
    if (std::isfinite(rate)) rep.min_trace_delta = std::min(rep.min_trace_delta, next - rate);
    rep.iterations = iter + 1;
    if (std::isfinite(rate) && std::abs(next - rate) <= cfg.rel_tol * std::max(1.0, std::abs(rate))) {
      rate = next;
      converged = true;
      break;
    }
    rate = next;
  }
  rep.budget_exhausted = !converged;
  rep.candidate_evals = st.candidate_evals;
  rep.zf_builds = st.zf_builds;

  rep.sinrs.resize(users);
  for (int u = 0; u < users; ++u) rep.sinrs(u) = sinr_from_heff(st.h_star, p, u, st.sigma2(u));
  res.precoder = std::move(p);
  res.coders = std::move(coders);
  return res;
}

}  // namespace pixsim
