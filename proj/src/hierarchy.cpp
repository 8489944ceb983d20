#include "pixsim/hierarchy.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "pixsim/beamspace.hpp"
#include "pixsim/rng.hpp"

namespace pixsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

long long ipow(int base, int exp) {
  long long v = 1;
  for (int i = 0; i < exp; ++i) v *= base;
  return v;
}
}  // namespace

HierarchicalCodebook load_hierarchy(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  int q = -1, a = -1, l = -1;
  if (!(is >> q >> a >> l) || q < 1 || a < 1 || l < 1) throw std::runtime_error(path + ": bad 'Q A L' header");
  HierarchicalCodebook hc;
  hc.q = q;
  hc.branching = a;
  hc.layer_count = l;
  hc.layers.resize(static_cast<std::size_t>(l));
  std::string line;
  for (int layer = 1; layer <= l; ++layer) {
    const long long count = ipow(a, layer);
    auto& cws = hc.layers[static_cast<std::size_t>(layer - 1)];
    cws.reserve(static_cast<std::size_t>(count));
    for (long long cidx = 0; cidx < count; ++cidx) {
      if (!(is >> line) || static_cast<int>(line.size()) != q)
        throw std::runtime_error(path + ": malformed codeword in layer " + std::to_string(layer));
      AntennaCoder c = AntennaCoder::zeros(q);
      for (int j = 0; j < q; ++j) {
        if (line[static_cast<std::size_t>(j)] == '1')
          c.bits[static_cast<std::size_t>(j)] = 1;
        else if (line[static_cast<std::size_t>(j)] != '0')
          throw std::runtime_error(path + ": non-binary character in layer " + std::to_string(layer));
      }
      cws.push_back(std::move(c));
    }
  }
  return hc;
}

void save_hierarchy(const std::string& path, const HierarchicalCodebook& hc) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << hc.q << ' ' << hc.branching << ' ' << hc.layer_count << '\n';
  for (const auto& layer : hc.layers)
    for (const auto& c : layer) os << c.str() << '\n';
}

HierarchicalCodebook build_hierarchy(const TrainingSet& ts, int branching, int layer_count, double rho_bar,
                                     const SeboConfig& sebo_cfg, std::uint64_t seed, const PortModel& model,
                                     const PatternBasis& basis, HierarchyBuildDiagnostics* diag) {
  if (branching < 2) throw std::invalid_argument("build_hierarchy: branching must be >= 2");
  if (layer_count < 1) throw std::invalid_argument("build_hierarchy: layer_count must be >= 1");
  if (ts.size() < 1) throw std::invalid_argument("build_hierarchy: empty training set");

  PatternTable table(basis, model);
  HierarchicalCodebook hc;
  hc.q = model.q;
  hc.branching = branching;
  hc.layer_count = layer_count;
  hc.layers.resize(static_cast<std::size_t>(layer_count));

  HierarchyBuildDiagnostics local;
  HierarchyBuildDiagnostics& dg = diag ? *diag : local;
  dg = HierarchyBuildDiagnostics{};
  dg.partition_sizes.resize(static_cast<std::size_t>(layer_count));

  std::vector<int> all(static_cast<std::size_t>(ts.size()));
  for (int s = 0; s < ts.size(); ++s) all[static_cast<std::size_t>(s)] = s;
  std::vector<std::vector<int>> subsets{all};  // training set per sub-codebook of the current layer

  for (int layer = 1; layer <= layer_count; ++layer) {
    auto& cws = hc.layers[static_cast<std::size_t>(layer - 1)];
    cws.reserve(static_cast<std::size_t>(ipow(branching, layer)));
    std::vector<std::vector<int>> next;
    if (layer < layer_count) next.resize(static_cast<std::size_t>(ipow(branching, layer)));

    for (std::size_t sub = 0; sub < subsets.size(); ++sub) {
      const std::vector<int>& subset = subsets[sub];
      dg.partition_sizes[static_cast<std::size_t>(layer - 1)].push_back(static_cast<int>(subset.size()));

      std::vector<AntennaCoder> sub_cws;
      if (subset.empty()) {
        // dead branch: inherit the parent codeword so the tree stays full
        sub_cws.assign(static_cast<std::size_t>(branching), hc.layers[static_cast<std::size_t>(layer - 2)][sub]);
        ++dg.empty_children;
      } else {
        FlatCodebook cb = lloyd_train_m(ts, subset, branching, rho_bar, sebo_cfg,
                                        derive_seed(seed, {static_cast<std::uint64_t>(layer), static_cast<std::uint64_t>(sub)}),
                                        table);
        sub_cws = std::move(cb.codewords);
      }

      if (layer < layer_count) {
        for (int s : subset) {
          double best = -kInf;
          int best_a = 0;
          for (int a = 0; a < branching; ++a) {
            const double v = training_metric(ts, s, sub_cws[static_cast<std::size_t>(a)], rho_bar, table);
            if (v > best) {
              best = v;
              best_a = a;
            }
          }
          next[sub * static_cast<std::size_t>(branching) + static_cast<std::size_t>(best_a)].push_back(s);
        }
      }
      for (auto& c : sub_cws) cws.push_back(std::move(c));
    }
    subsets = std::move(next);
  }
  return hc;
}

SearchResult hierarchical_search_optimize(const std::vector<ReducedChannel>& channels, const HierarchicalCodebook& hc,
                                          const PortModel& model, const PatternBasis& basis, const SearchConfig& cfg) {
  const int users = static_cast<int>(channels.size());
  const int a_count = hc.branching;
  const int l_count = hc.layer_count;
  if (users < 1 || a_count < 1 || l_count < 1) throw std::invalid_argument("hierarchical_search_optimize: empty inputs");
  if (users > channels[0].h_bar.cols()) throw std::invalid_argument("hierarchical_search_optimize: needs U <= N");

  PatternTable table(basis, model);
  detail::SearchState st;
  st.channels = &channels;
  st.sigma2 = detail::checked_sigma2(cfg.sigma2, users);
  st.p_budget = cfg.p_budget;
  st.h_star.resize(static_cast<std::size_t>(users));

  auto rng = make_rng(cfg.seed);
  std::vector<AntennaCoder> coders(static_cast<std::size_t>(users));
  std::uniform_int_distribution<int> pick(0, a_count - 1);
  for (int u = 0; u < users; ++u) {
    coders[static_cast<std::size_t>(u)] = hc.layers[0][static_cast<std::size_t>(pick(rng))];
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
      long long sub0 = 0;  // 0-based sub-codebook index within the current layer
      CVec best_h;
      CMat best_p;
      double leaf_obj = -kInf;
      for (int layer = 1; layer <= l_count; ++layer) {
        const auto& cws = hc.layers[static_cast<std::size_t>(layer - 1)];
        const long long base = sub0 * a_count;
        double best = -kInf;
        int best_a = -1;
        for (int a = 0; a < a_count; ++a) {
          const CVec h_cand = effective_channel(table.get(cws[static_cast<std::size_t>(base + a)]),
                                                channels[static_cast<std::size_t>(u)].h_bar);
          CMat p_cand;
          const double obj = st.evaluate_candidate(u, h_cand, &p_cand);
          if (obj > best) {
            best = obj;
            best_a = a;
            if (layer == l_count) {
              best_h = h_cand;
              best_p = std::move(p_cand);
              leaf_obj = obj;
            }
          }
        }
        if (best_a < 0)
          throw std::runtime_error("hierarchical_search_optimize: all candidates rank-deficient for user " +
                                   std::to_string(u));
        sub0 = sub0 * a_count + best_a;
      }

      // Step 4.4 selection from the final index; must match the descent's leaf.
      const long long i1 = sub0 + 1;
      const int a_sel = (i1 % a_count != 0) ? static_cast<int>(i1 % a_count) : a_count;
      const long long sub_sel = (i1 - a_sel) / a_count + 1;
      const AntennaCoder& selected =
          hc.layers[static_cast<std::size_t>(l_count - 1)][static_cast<std::size_t>((sub_sel - 1) * a_count + a_sel - 1)];
      if (!(selected == hc.layers[static_cast<std::size_t>(l_count - 1)][static_cast<std::size_t>(sub0)]))
        throw std::logic_error("hierarchical_search_optimize: mod-rule coder disagrees with descent leaf");

      coders[static_cast<std::size_t>(u)] = selected;
      st.h_star[static_cast<std::size_t>(u)] = std::move(best_h);
      p = std::move(best_p);
      rep.objective_trace.push_back(leaf_obj);
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
