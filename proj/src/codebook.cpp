#include "pixsim/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "pixsim/beamspace.hpp"
#include "pixsim/kernels.hpp"
#include "pixsim/rng.hpp"

namespace pixsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZfRcondFloor = 1e-12;
}  // namespace

FlatCodebook load_codebook(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  int q = -1, m = -1;
  if (!(is >> q >> m) || q < 1 || m < 1) throw std::runtime_error(path + ": bad 'Q M' header");
  FlatCodebook cb;
  cb.codewords.reserve(static_cast<std::size_t>(m));
  std::string line;
  for (int i = 0; i < m; ++i) {
    if (!(is >> line) || static_cast<int>(line.size()) != q)
      throw std::runtime_error(path + ": codeword " + std::to_string(i) + " malformed");
    AntennaCoder c = AntennaCoder::zeros(q);
    for (int j = 0; j < q; ++j) {
      if (line[static_cast<std::size_t>(j)] == '1')
        c.bits[static_cast<std::size_t>(j)] = 1;
      else if (line[static_cast<std::size_t>(j)] != '0')
        throw std::runtime_error(path + ": codeword " + std::to_string(i) + " has non-binary character");
    }
    cb.codewords.push_back(std::move(c));
  }
  return cb;
}

void save_codebook(const std::string& path, const FlatCodebook& cb) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << cb.q() << ' ' << cb.size() << '\n';
  for (const auto& c : cb.codewords) os << c.str() << '\n';
}

TrainingSet make_training_set(int n_eff, int n, int users, int count, std::mt19937_64& rng) {
  TrainingSet ts;
  ts.users = users;
  ts.n = n;
  ts.samples.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) ts.samples.push_back(complex_normal_matrix(n_eff, n * users, rng));
  return ts;
}

bool try_zf_directions(const std::vector<CVec>& rows, CMat& unit_cols) {
  const int users = static_cast<int>(rows.size());
  const Eigen::Index n = rows[0].size();
  CMat h(users, n);
  for (int u = 0; u < users; ++u) h.row(u) = rows[static_cast<std::size_t>(u)].transpose();

  CMat gram = h * h.adjoint();
  Eigen::LLT<CMat> llt(gram);
  if (llt.info() != Eigen::Success || !(llt.rcond() > kZfRcondFloor)) return false;
  CMat x = llt.solve(CMat::Identity(users, users));
  unit_cols = h.adjoint() * x;
  for (int u = 0; u < users; ++u) {
    const double nrm = unit_cols.col(u).norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) return false;
    unit_cols.col(u) /= nrm;
  }
  return true;
}

CMat zf_precoder(const CMat& h_eff_rows, double p_budget) {
  const int users = static_cast<int>(h_eff_rows.rows());
  if (users > h_eff_rows.cols()) throw std::invalid_argument("zf_precoder: needs U <= N");
  std::vector<CVec> rows(static_cast<std::size_t>(users));
  for (int u = 0; u < users; ++u) rows[static_cast<std::size_t>(u)] = h_eff_rows.row(u).transpose();
  CMat dirs;
  if (!try_zf_directions(rows, dirs))
    throw std::runtime_error("zf_precoder: rank-deficient effective channel matrix (colliding effective channels)");
  return std::sqrt(p_budget / users) * dirs;
}

double training_metric(const TrainingSet& ts, int sample, const AntennaCoder& codeword, double rho_bar,
                       PatternTable& table) {
  if (!(rho_bar > 0.0)) throw std::invalid_argument("training_metric: rho_bar must be > 0");
  const CVec& w = table.get(codeword);
  std::vector<CVec> rows(static_cast<std::size_t>(ts.users));
  for (int u = 0; u < ts.users; ++u) rows[static_cast<std::size_t>(u)] = effective_channel(w, ts.user_block(sample, u));
  CMat dirs;
  if (!try_zf_directions(rows, dirs)) return -kInf;
  double metric = 0.0;
  for (int u = 0; u < ts.users; ++u) {
    const CVec& h = rows[static_cast<std::size_t>(u)];
    const cxd g = kern::cdotu(static_cast<std::size_t>(h.size()), h.data(), dirs.col(u).data());
    metric += std::log2(1.0 + rho_bar * std::norm(g));
  }
  return metric;
}

namespace {

std::vector<AntennaCoder> random_distinct_coders(int q, int m, std::mt19937_64& rng) {
  std::set<std::string> seen;
  std::vector<AntennaCoder> out;
  std::uniform_int_distribution<int> bit(0, 1);
  const bool want_distinct = q < 63 ? (static_cast<std::uint64_t>(m) <= (1ULL << q)) : true;
  while (static_cast<int>(out.size()) < m) {
    AntennaCoder c = AntennaCoder::zeros(q);
    for (int j = 0; j < q; ++j) c.bits[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(bit(rng));
    if (want_distinct && !seen.insert(c.str()).second) continue;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

FlatCodebook lloyd_train_m(const TrainingSet& ts, const std::vector<int>& subset, int m_codewords, double rho_bar,
                           const SeboConfig& sebo_cfg, std::uint64_t seed, PatternTable& table,
                           LloydDiagnostics* diag) {
  if (m_codewords < 1) throw std::invalid_argument("lloyd_train_m: need at least one codeword");
  const int q = table.q();

  std::vector<int> idx = subset;
  if (idx.empty()) {
    idx.resize(static_cast<std::size_t>(ts.size()));
    for (int s = 0; s < ts.size(); ++s) idx[static_cast<std::size_t>(s)] = s;
  }
  const int s_count = static_cast<int>(idx.size());
  if (s_count == 0) throw std::invalid_argument("lloyd_train_m: empty training set");

  auto rng = make_rng(derive_seed(seed, {static_cast<std::uint64_t>(m_codewords)}));
  FlatCodebook cb;
  cb.codewords = random_distinct_coders(q, m_codewords, rng);

  LloydDiagnostics local;
  LloydDiagnostics& dg = diag ? *diag : local;
  dg = LloydDiagnostics{};

  std::vector<int> assign(static_cast<std::size_t>(s_count), 0);
  std::vector<double> best_val(static_cast<std::size_t>(s_count), -kInf);

  auto partition = [&]() {
    double total = 0.0;
    for (int si = 0; si < s_count; ++si) {
      const int s = idx[static_cast<std::size_t>(si)];
      double best = -kInf;
      int best_m = 0;
      for (int m = 0; m < m_codewords; ++m) {
        const double v = training_metric(ts, s, cb.codewords[static_cast<std::size_t>(m)], rho_bar, table);
        if (v > best) {
          best = v;
          best_m = m;
        }
      }
      assign[static_cast<std::size_t>(si)] = best_m;
      best_val[static_cast<std::size_t>(si)] = best;
      total += best;
    }
    return total / s_count;
  };

  double prev_obj = -kInf;
  constexpr int kMaxRounds = 50;
  for (int round = 0; round < kMaxRounds; ++round) {
    double obj = partition();
    dg.objective_trace.push_back(obj);
    dg.rounds = round + 1;

    // cells and empty-cell repair
    std::vector<std::vector<int>> cells(static_cast<std::size_t>(m_codewords));
    for (int si = 0; si < s_count; ++si) cells[static_cast<std::size_t>(assign[static_cast<std::size_t>(si)])].push_back(idx[static_cast<std::size_t>(si)]);
    for (int m = 0; m < m_codewords; ++m) {
      if (!cells[static_cast<std::size_t>(m)].empty()) continue;
      int worst_si = 0;
      for (int si = 1; si < s_count; ++si)
        if (best_val[static_cast<std::size_t>(si)] < best_val[static_cast<std::size_t>(worst_si)]) worst_si = si;
      const int worst_sample = idx[static_cast<std::size_t>(worst_si)];
      SeboConfig cfg = sebo_cfg;
      cfg.seed = derive_seed(seed, {7u, static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(m)});
      auto f = [&](const AntennaCoder& c) { return training_metric(ts, worst_sample, c, rho_bar, table); };
      cb.codewords[static_cast<std::size_t>(m)] = sebo_maximize(f, q, cfg, &cb.codewords[static_cast<std::size_t>(m)]).best;
      ++dg.empty_cell_repairs;
    }

    // centroid step: each non-empty cell re-optimizes its codeword by SEBO
    double after = 0.0;
    for (int m = 0; m < m_codewords; ++m) {
      const auto& cell = cells[static_cast<std::size_t>(m)];
      if (cell.empty()) continue;
      auto f = [&](const AntennaCoder& c) {
        double acc = 0.0;
        for (int s : cell) acc += training_metric(ts, s, c, rho_bar, table);
        return acc / static_cast<double>(cell.size());
      };
      SeboConfig cfg = sebo_cfg;
      cfg.seed = derive_seed(seed, {11u, static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(m)});
      SeboResult res = sebo_maximize(f, q, cfg, &cb.codewords[static_cast<std::size_t>(m)]);
      cb.codewords[static_cast<std::size_t>(m)] = std::move(res.best);
      after += res.value * static_cast<double>(cell.size());
    }
    after /= s_count;
    dg.objective_trace.push_back(after);

    if (std::isfinite(prev_obj) && after - prev_obj <= 1e-6 * std::max(1.0, std::abs(prev_obj))) {
      dg.converged = true;
      prev_obj = after;
      break;
    }
    prev_obj = after;
  }

  std::set<std::string> uniq;
  for (const auto& c : cb.codewords) uniq.insert(c.str());
  dg.duplicate_codewords = m_codewords - static_cast<int>(uniq.size());
  return cb;
}

FlatCodebook lloyd_train(const TrainingSet& ts, int d_bits, double rho_bar, const SeboConfig& sebo_cfg,
                         std::uint64_t seed, const PortModel& model, const PatternBasis& basis,
                         LloydDiagnostics* diag) {
  if (d_bits < 0) throw std::invalid_argument("lloyd_train: d_bits must be >= 0");
  PatternTable table(basis, model);
  return lloyd_train_m(ts, {}, 1 << d_bits, rho_bar, sebo_cfg, seed, table, diag);
}

namespace detail {

RVec checked_sigma2(const RVec& sigma2, int users) {
  if (sigma2.size() == 0) return RVec::Ones(users);
  if (sigma2.size() != users) throw std::invalid_argument("sigma2 length must equal user count");
  for (Eigen::Index i = 0; i < sigma2.size(); ++i)
    if (!(sigma2(i) > 0.0)) throw std::invalid_argument("sigma2 entries must be > 0");
  return sigma2;
}

bool SearchState::current_zf(CMat& p) {
  ++zf_builds;
  CMat dirs;
  if (!try_zf_directions(h_star, dirs)) return false;
  p = std::sqrt(p_budget / static_cast<double>(h_star.size())) * dirs;
  return true;
}

double SearchState::evaluate_candidate(int user, const CVec& h_cand, CMat* zf_out) {
  ++candidate_evals;
  ++zf_builds;
  const int users = static_cast<int>(h_star.size());
  std::vector<CVec> rows = h_star;
  rows[static_cast<std::size_t>(user)] = h_cand;
  CMat dirs;
  if (!try_zf_directions(rows, dirs)) return -kInf;
  CMat p = std::sqrt(p_budget / static_cast<double>(users)) * dirs;

  double obj = 0.0;
  for (int j = 0; j < users; ++j) {
    const CVec& h = (j == user) ? h_cand : h_star[static_cast<std::size_t>(j)];
    const cxd g = kern::cdotu(static_cast<std::size_t>(h.size()), h.data(), p.col(j).data());
    obj += std::log2(1.0 + std::norm(g) / sigma2(j));
  }
  if (zf_out) *zf_out = std::move(p);
  return obj;
}

}  // namespace detail

SearchResult flat_search_optimize(const std::vector<ReducedChannel>& channels, const FlatCodebook& cb,
                                  const PortModel& model, const PatternBasis& basis, const SearchConfig& cfg) {
  const int users = static_cast<int>(channels.size());
  const int m_count = cb.size();
  if (users < 1 || m_count < 1) throw std::invalid_argument("flat_search_optimize: empty inputs");
  if (users > channels[0].h_bar.cols()) throw std::invalid_argument("flat_search_optimize: needs U <= N");

  PatternTable table(basis, model);
  detail::SearchState st;
  st.channels = &channels;
  st.sigma2 = detail::checked_sigma2(cfg.sigma2, users);
  st.p_budget = cfg.p_budget;
  st.h_star.resize(static_cast<std::size_t>(users));

  auto rng = make_rng(cfg.seed);
  std::vector<AntennaCoder> coders(static_cast<std::size_t>(users));
  std::uniform_int_distribution<int> pick(0, m_count - 1);
  for (int u = 0; u < users; ++u) {
    coders[static_cast<std::size_t>(u)] = cb.codewords[static_cast<std::size_t>(pick(rng))];
    st.h_star[static_cast<std::size_t>(u)] =
        effective_channel(table.get(coders[static_cast<std::size_t>(u)]), channels[static_cast<std::size_t>(u)].h_bar);
  }

  SearchResult res;
  SolveReport& rep = res.report;
  rep.min_trace_delta = std::numeric_limits<double>::infinity();

  CMat p;
  double rate = st.current_zf(p) ? sum_rate_from_heff(st.h_star, p, st.sigma2) : -kInf;
  rep.rate_trace.push_back(rate);

  bool converged = false;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    for (int u = 0; u < users; ++u) {
      double best = -kInf;
      int best_m = -1;
      CVec best_h;
      CMat best_p;
      for (int m = 0; m < m_count; ++m) {
        const CVec h_cand =
            effective_channel(table.get(cb.codewords[static_cast<std::size_t>(m)]), channels[static_cast<std::size_t>(u)].h_bar);
        CMat p_cand;
        const double obj = st.evaluate_candidate(u, h_cand, &p_cand);
        if (obj > best) {
          best = obj;
          best_m = m;
          best_h = h_cand;
          best_p = std::move(p_cand);
        }
      }
      if (best_m < 0)
        throw std::runtime_error("flat_search_optimize: all candidates rank-deficient for user " + std::to_string(u));
      coders[static_cast<std::size_t>(u)] = cb.codewords[static_cast<std::size_t>(best_m)];
      st.h_star[static_cast<std::size_t>(u)] = std::move(best_h);
      p = std::move(best_p);
      rep.objective_trace.push_back(best);
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
