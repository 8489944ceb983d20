#include "pixsim/beamspace.hpp"

#include <stdexcept>

#include <Eigen/QR>

#include "pixsim/kernels.hpp"
#include "pixsim/rng.hpp"

namespace pixsim {

std::vector<ReducedChannel> sample_reduced(int n_eff, int n, int u_count, std::mt19937_64& rng) {
  if (n_eff < 1 || n < 1 || u_count < 1) throw std::invalid_argument("sample_reduced: counts must be >= 1");
  std::vector<ReducedChannel> out;
  out.reserve(static_cast<std::size_t>(u_count));
  for (int u = 0; u < u_count; ++u) out.push_back({complex_normal_matrix(n_eff, n, rng), u});
  return out;
}

ReducedChannel sample_virtual_and_reduce(const PatternBasis& basis, const CMat& e_t, std::mt19937_64& rng) {
  const Eigen::Index two_k = basis.u_mat.rows();
  if (e_t.rows() != two_k) throw std::invalid_argument("sample_virtual_and_reduce: e_t row count must be 2K");
  const CMat gram = e_t.adjoint() * e_t;
  if ((gram - CMat::Identity(e_t.cols(), e_t.cols())).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("sample_virtual_and_reduce: e_t columns are not orthonormal");

  CMat h_v = complex_normal_matrix(static_cast<int>(two_k), static_cast<int>(two_k), rng);
  return {basis.u_mat.transpose() * h_v * e_t, 0};
}

CMat random_orthonormal_patterns(int two_k, int n, std::mt19937_64& rng) {
  if (n > two_k) throw std::invalid_argument("random_orthonormal_patterns: n must be <= 2K");
  CMat g = complex_normal_matrix(two_k, n, rng);
  Eigen::HouseholderQR<CMat> qr(g);
  CMat q = qr.householderQ() * CMat::Identity(two_k, n);
  return q;
}

CVec effective_channel(const CVec& w, const CMat& h_bar) {
  if (w.size() != h_bar.rows()) throw std::invalid_argument("effective_channel: dimension mismatch");
  CVec h(h_bar.cols());
  const auto n_eff = static_cast<std::size_t>(w.size());
  for (Eigen::Index j = 0; j < h_bar.cols(); ++j) h(j) = kern::cdotc(n_eff, w.data(), h_bar.col(j).data());
  return h;
}

}  // namespace pixsim
