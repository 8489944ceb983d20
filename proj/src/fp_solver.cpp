#include "pixsim/fp_solver.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "pixsim/beamspace.hpp"
#include "pixsim/kernels.hpp"
#include "pixsim/rng.hpp"

namespace pixsim {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

RVec default_sigma2(const RVec& sigma2, int users) {
  if (sigma2.size() == 0) return RVec::Ones(users);
  if (sigma2.size() != users) throw std::invalid_argument("sigma2 length must equal user count");
  return sigma2;
}

// |h_u . p_j|^2 for all j, plus the signal term index.
inline double channel_power_sum(const CVec& h, const CMat& p, int user, double& own) {
  double total = 0.0;
  const auto n = static_cast<std::size_t>(h.size());
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    const cxd s = kern::cdotu(n, h.data(), p.col(j).data());
    const double mag = s.real() * s.real() + s.imag() * s.imag();
    total += mag;
    if (j == user) own = mag;
  }
  return total;
}

}  // namespace

double sinr_from_heff(const std::vector<CVec>& h_eff, const CMat& p, int user, double sigma2_user) {
  if (!(sigma2_user > 0.0)) throw std::invalid_argument("sinr: sigma2 must be > 0");
  double own = 0.0;
  const double total = channel_power_sum(h_eff[static_cast<std::size_t>(user)], p, user, own);
  return own / (total - own + sigma2_user);
}

double sum_rate_from_heff(const std::vector<CVec>& h_eff, const CMat& p, const RVec& sigma2) {
  double r = 0.0;
  for (std::size_t u = 0; u < h_eff.size(); ++u)
    r += std::log2(1.0 + sinr_from_heff(h_eff, p, static_cast<int>(u), sigma2(static_cast<Eigen::Index>(u))));
  return r;
}

double sinr(const CMat& p, const CVec& w_u, const ReducedChannel& h_bar_u, int user, double sigma2_user) {
  std::vector<CVec> h(static_cast<std::size_t>(p.cols()));
  h[static_cast<std::size_t>(user)] = effective_channel(w_u, h_bar_u.h_bar);
  return sinr_from_heff(h, p, user, sigma2_user);
}

double sum_rate(const CMat& p, const std::vector<CVec>& ws, const std::vector<ReducedChannel>& channels,
                const RVec& sigma2) {
  std::vector<CVec> h(channels.size());
  for (std::size_t u = 0; u < channels.size(); ++u) h[u] = effective_channel(ws[u], channels[u].h_bar);
  return sum_rate_from_heff(h, p, sigma2);
}

RVec update_iota(const std::vector<CVec>& h_eff, const CMat& p, const RVec& sigma2) {
  RVec iota(static_cast<Eigen::Index>(h_eff.size()));
  for (std::size_t u = 0; u < h_eff.size(); ++u)
    iota(static_cast<Eigen::Index>(u)) = sinr_from_heff(h_eff, p, static_cast<int>(u), sigma2(static_cast<Eigen::Index>(u)));
  return iota;
}

CVec update_tau(const std::vector<CVec>& h_eff, const CMat& p, const RVec& iota, const RVec& sigma2) {
  CVec tau(static_cast<Eigen::Index>(h_eff.size()));
  for (std::size_t u = 0; u < h_eff.size(); ++u) {
    const auto ui = static_cast<Eigen::Index>(u);
    const CVec& h = h_eff[u];
    double own = 0.0;
    const double total = channel_power_sum(h, p, static_cast<int>(u), own);
    const cxd s = kern::cdotu(static_cast<std::size_t>(h.size()), h.data(), p.col(ui).data());
    tau(ui) = std::sqrt(1.0 + iota(ui)) * s / (total + sigma2(ui));
  }
  return tau;
}

double fp_surrogate(const std::vector<CVec>& h_eff, const CMat& p, const RVec& iota, const CVec& tau,
                    const RVec& sigma2) {
  // Quadratic-transform terms are derived in nats; expressing the surrogate
  // in bits requires the 1/ln2 scaling for R_tilde = R to hold at the
  // closed-form auxiliary optima.
  double val = 0.0;
  for (std::size_t u = 0; u < h_eff.size(); ++u) {
    const auto ui = static_cast<Eigen::Index>(u);
    const CVec& h = h_eff[u];
    double own = 0.0;
    const double total = channel_power_sum(h, p, static_cast<int>(u), own);
    const cxd s = kern::cdotu(static_cast<std::size_t>(h.size()), h.data(), p.col(ui).data());
    const double cross = 2.0 * std::sqrt(1.0 + iota(ui)) * (std::conj(tau(ui)) * s).real();
    const double quad = std::norm(tau(ui)) * (total + sigma2(ui));
    val += std::log2(1.0 + iota(ui)) + (-iota(ui) + cross - quad) / kLn2;
  }
  return val;
}

PrecoderUpdate update_precoder(const std::vector<CVec>& h_eff, const RVec& iota, const CVec& tau, double p_budget,
                               double bisect_tol) {
  const int users = static_cast<int>(h_eff.size());
  const Eigen::Index n = h_eff[0].size();

  CMat a_mat = CMat::Zero(n, n);
  CMat rhs(n, users);  // columns a_u
  for (int u = 0; u < users; ++u) {
    const CVec hc = h_eff[static_cast<std::size_t>(u)].conjugate();  // H_bar^H w = h_eff^H
    a_mat.noalias() += std::norm(tau(u)) * (hc * hc.adjoint());
    rhs.col(u) = std::sqrt(1.0 + iota(u)) * tau(u) * hc;
  }

  const double reg = 1e-12 * std::max(a_mat.trace().real() / static_cast<double>(n), 1.0);
  auto solve_at = [&](double mu) -> CMat {
    CMat m = a_mat;
    m.diagonal().array() += cxd(mu, 0.0);
    Eigen::LLT<CMat> llt(m);
    if (llt.info() != Eigen::Success) {
      m.diagonal().array() += cxd(reg, 0.0);
      llt.compute(m);
      if (llt.info() != Eigen::Success) throw std::runtime_error("update_precoder: factorization failed");
    }
    return llt.solve(rhs);
  };
  auto power_of = [](const CMat& p) { return kern::sumabs2(static_cast<std::size_t>(p.size()), p.data()); };

  PrecoderUpdate out;
  out.p = solve_at(0.0);
  out.power = power_of(out.p);
  if (out.power <= p_budget * (1.0 + 1e-12)) return out;  // constraint inactive

  // phi(mu) = ||P(mu)||_F^2 is decreasing; find the feasible side of the root.
  double lo = 0.0, hi = 1e-12;
  CMat p_hi = solve_at(hi);
  double pw_hi = power_of(p_hi);
  while (pw_hi > p_budget) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw std::runtime_error("update_precoder: bisection bracket failure (degenerate linear terms)");
    p_hi = solve_at(hi);
    pw_hi = power_of(p_hi);
  }
  for (int it = 0; it < 200 && p_budget - pw_hi > bisect_tol * p_budget; ++it) {
    const double mid = 0.5 * (lo + hi);
    CMat pm = solve_at(mid);
    const double pw = power_of(pm);
    if (pw > p_budget) {
      lo = mid;
    } else {
      hi = mid;
      p_hi.swap(pm);
      pw_hi = pw;
    }
  }
  out.p = std::move(p_hi);
  out.mu = hi;
  out.binding = true;
  out.power = pw_hi;
  return out;
}

BinaryObjective coder_objective(const ReducedChannel& chan, const CMat& p, double iota_u, cxd tau_u, int user,
                                PatternTable& table) {
  // Q_u = |tau|^2 (H P)(H P)^H, q_u = sqrt(1+iota) conj(tau) (H P) e_u
  const CMat hp = chan.h_bar * p;  // n_eff x users
  auto q_mat = std::make_shared<CMat>(std::norm(tau_u) * (hp * hp.adjoint()));
  auto q_vec = std::make_shared<CVec>(std::sqrt(1.0 + iota_u) * std::conj(tau_u) * hp.col(user));
  return [q_mat, q_vec, &table](const AntennaCoder& b) {
    const CVec& w = table.get(b);
    const auto n = static_cast<std::size_t>(w.size());
    const double lin = 2.0 * kern::cdotc(n, w.data(), q_vec->data()).real();
    CVec y = CVec::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j)
      kern::caxpy(n, w(static_cast<Eigen::Index>(j)), q_mat->col(static_cast<Eigen::Index>(j)).data(), y.data());
    const double quad = kern::cdotc(n, w.data(), y.data()).real();
    return lin - quad;
  };
}

std::vector<AntennaCoder> update_coders(const std::vector<ReducedChannel>& channels, const CMat& p, const RVec& iota,
                                        const CVec& tau, PatternTable& table, std::vector<AntennaCoder> current,
                                        const SeboConfig& sebo_cfg, std::uint64_t seed_base, long long* eval_counter) {
  const int q = current.empty() ? 0 : current[0].size();
  for (std::size_t u = 0; u < channels.size(); ++u) {
    auto f = coder_objective(channels[u], p, iota(static_cast<Eigen::Index>(u)), tau(static_cast<Eigen::Index>(u)),
                             static_cast<int>(u), table);
    SeboConfig cfg = sebo_cfg;
    cfg.seed = derive_seed(seed_base, {static_cast<std::uint64_t>(u)});
    const double f_old = f(current[u]);
    SeboResult res = sebo_maximize(f, q, cfg, &current[u]);
    if (eval_counter) *eval_counter += static_cast<long long>(res.trace.evaluations) + 1;
    if (res.value >= f_old) current[u] = std::move(res.best);
  }
  return current;
}

FpResult fp_alternate(const std::vector<ReducedChannel>& channels, const PortModel& model, const PatternBasis& basis,
                      const FpConfig& cfg) {
  const int users = static_cast<int>(channels.size());
  if (users < 1) throw std::invalid_argument("fp_alternate: need at least one user");
  const Eigen::Index n = channels[0].h_bar.cols();
  const RVec sigma2 = default_sigma2(cfg.sigma2, users);

  PatternTable table(basis, model);
  std::vector<AntennaCoder> coders(static_cast<std::size_t>(users), AntennaCoder::zeros(model.q));
  std::vector<CVec> h_eff(static_cast<std::size_t>(users));
  auto refresh_heff = [&](std::size_t u) { h_eff[u] = effective_channel(table.get(coders[u]), channels[u].h_bar); };
  for (std::size_t u = 0; u < coders.size(); ++u) refresh_heff(u);

  // matched-filter start scaled onto the power budget
  CMat p = CMat::Zero(n, users);
  double mf_norm2 = 0.0;
  for (int u = 0; u < users; ++u) {
    p.col(u) = h_eff[static_cast<std::size_t>(u)].conjugate();
    mf_norm2 += p.col(u).squaredNorm();
  }
  if (mf_norm2 > 0.0) p *= std::sqrt(cfg.p_budget / mf_norm2);

  FpResult res;
  SolveReport& rep = res.report;
  rep.min_trace_delta = std::numeric_limits<double>::infinity();
  double rate = sum_rate_from_heff(h_eff, p, sigma2);
  rep.rate_trace.push_back(rate);

  bool converged = false;
  for (int iter = 0; iter < cfg.max_outer; ++iter) {
    const RVec iota = update_iota(h_eff, p, sigma2);
    const CVec tau = update_tau(h_eff, p, iota, sigma2);
    rep.max_tightness_gap =
        std::max(rep.max_tightness_gap, std::abs(fp_surrogate(h_eff, p, iota, tau, sigma2) - sum_rate_from_heff(h_eff, p, sigma2)));

    PrecoderUpdate pu = update_precoder(h_eff, iota, tau, cfg.p_budget, cfg.bisect_tol);
    p = std::move(pu.p);
    rep.max_power_violation = std::max(rep.max_power_violation, pu.power - cfg.p_budget);
    if (pu.binding)
      rep.max_binding_power_dev = std::max(rep.max_binding_power_dev, std::abs(pu.power - cfg.p_budget) / cfg.p_budget);

    coders = update_coders(channels, p, iota, tau, table, std::move(coders), cfg.sebo,
                           derive_seed(cfg.seed, {static_cast<std::uint64_t>(iter)}), &rep.candidate_evals);
    for (std::size_t u = 0; u < coders.size(); ++u) refresh_heff(u);

    const double next = sum_rate_from_heff(h_eff, p, sigma2);
    rep.rate_trace.push_back(next);
    rep.min_trace_delta = std::min(rep.min_trace_delta, next - rate);
    rep.iterations = iter + 1;
    if (std::abs(next - rate) <= cfg.rel_tol * std::max(1.0, std::abs(rate))) {
      rate = next;
      converged = true;
      break;
    }
    rate = next;
  }
  rep.budget_exhausted = !converged;

  rep.sinrs.resize(users);
  for (int u = 0; u < users; ++u) rep.sinrs(u) = sinr_from_heff(h_eff, p, u, sigma2(u));
  res.precoder = std::move(p);
  res.coders = std::move(coders);
  return res;
}

}  // namespace pixsim
