#include "pixsim/port_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "pixsim/kernels.hpp"
#include "pixsim/matrix_io.hpp"
#include "pixsim/rng.hpp"

namespace pixsim {

namespace {

constexpr double kReciprocityTol = 1e-6;
constexpr double kPassivityTol = 1e-8;
constexpr double kMaxCondition = 1e12;

PortModel from_full_z(const CMat& z, const CMat& e_oc, int q, int k, const std::string& origin) {
  if (z.rows() != q + 1 || z.cols() != q + 1)
    throw std::runtime_error(origin + ": dimension mismatch, Z must be (Q+1)x(Q+1)");
  if (e_oc.rows() != 2 * k) throw std::runtime_error(origin + ": pattern dimension mismatch, E_oc must have 2K rows");
  if (e_oc.cols() != q + 1)
    throw std::runtime_error(origin + ": dimension mismatch between Z and E_oc column counts");

  const double asym = (z - z.transpose()).norm();
  if (asym > kReciprocityTol * std::max(1.0, z.norm()))
    throw std::runtime_error(origin + ": non-reciprocal impedance matrix");
  CMat zs = 0.5 * (z + z.transpose());

  RMat re = zs.real();
  Eigen::SelfAdjointEigenSolver<RMat> eig(re);
  if (eig.info() != Eigen::Success) throw std::runtime_error(origin + ": eigensolve failed on Re(Z)");
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (lo < -kPassivityTol * std::max(1.0, hi))
    throw std::runtime_error(origin + ": passivity violation, Re(Z) has eigenvalue " + std::to_string(lo));

  PortModel m;
  m.q = q;
  m.k = k;
  m.z_aa = zs(0, 0);
  m.z_pa = zs.block(1, 0, q, 1);
  m.z_pp = zs.block(1, 1, q, q);
  m.e_oc = e_oc;
  return m;
}

}  // namespace

CMat PortModel::full_z() const {
  CMat z(q + 1, q + 1);
  z(0, 0) = z_aa;
  if (q > 0) {
    z.block(0, 1, 1, q) = z_pa.transpose();
    z.block(1, 0, q, 1) = z_pa;
    z.block(1, 1, q, q) = z_pp;
  }
  return z;
}

PortModel load_port_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  int q = -1, k = -1;
  if (!(is >> q >> k) || q < 0 || k < 1) throw std::runtime_error(path + ": bad 'Q K' header");
  CMat z = read_complex_matrix(is, path + ":Z");
  CMat e_oc = read_complex_matrix(is, path + ":E_oc");
  return from_full_z(z, e_oc, q, k, path);
}

void save_port_model(const std::string& path, const PortModel& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << m.q << ' ' << m.k << '\n';
  write_complex_matrix(os, m.full_z());
  write_complex_matrix(os, m.e_oc);
}

PortModel synthesize_surrogate(int q, int k, std::uint64_t seed) {
  if (q < 0 || k < 1) throw std::invalid_argument("surrogate: need q >= 0, k >= 1");
  auto rng = make_rng(derive_seed(seed, {static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(k)}));

  constexpr double kDiagShift = 0.5;
  CMat a = complex_normal_matrix(q, q, rng);
  CMat z(q + 1, q + 1);
  z(0, 0) = complex_normal(rng) + cxd(kDiagShift, 0.0);
  if (q > 0) {
    CVec z_pa = complex_normal_matrix(q, 1, rng);
    z.block(1, 0, q, 1) = z_pa;
    z.block(0, 1, 1, q) = z_pa.transpose();
    z.block(1, 1, q, q) = a + a.transpose();
    z.block(1, 1, q, q).diagonal().array() += kDiagShift;
  }

  // Shift the real diagonal until Re(Z) clears a positive margin.
  Eigen::SelfAdjointEigenSolver<RMat> eig(RMat(z.real()));
  const double lo = eig.eigenvalues().minCoeff();
  if (lo < kDiagShift) z.diagonal().array() += cxd(kDiagShift - lo, 0.0);

  CMat e_oc = complex_normal_matrix(2 * k, q + 1, rng);
  return from_full_z(z, e_oc, q, k, "surrogate");
}

CVec load_impedance(const AntennaCoder& b, double beta) {
  CVec d(b.size());
  for (int i = 0; i < b.size(); ++i) d(i) = b.bits[static_cast<std::size_t>(i)] ? cxd(0.0, beta) : cxd(0.0, 0.0);
  return d;
}

CVec port_currents(const PortModel& m, const AntennaCoder& b) {
  if (!valid_coder(b, m.q)) throw std::invalid_argument("port_currents: coder length must equal q");
  CVec out(m.q + 1);
  out(0) = cxd(1.0, 0.0);
  if (m.q == 0) return out;

  CMat sys = m.z_pp;
  sys.diagonal() += load_impedance(b, m.open_load_beta);
  Eigen::PartialPivLU<CMat> lu(sys);
  const double rc = lu.rcond();
  if (!(rc > 1.0 / kMaxCondition))
    throw std::runtime_error("port_currents: ill-conditioned load system, cond ~ " + std::to_string(1.0 / std::max(rc, 1e-300)));

  const double bnorm = m.z_pa.norm();
  CVec x = lu.solve(m.z_pa);
  // One or two refinement steps: the open-load rows sit ~beta above the rest,
  // and the raw LU residual scales with ||sys||.
  for (int pass = 0; pass < 3; ++pass) {
    CVec r = m.z_pa - sys * x;
    if (r.norm() <= 1e-10 * bnorm) break;
    x += lu.solve(r);
  }
  out.tail(m.q) = -x;
  return out;
}

PatternBasis reduce_basis(const PortModel& m, double rank_tol) {
  if (!(rank_tol > 0.0 && rank_tol < 1.0)) throw std::invalid_argument("reduce_basis: rank_tol must be in (0,1)");
  Eigen::JacobiSVD<CMat> svd(m.e_oc, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) throw std::runtime_error("reduce_basis: pattern matrix has no positive singular value");
  int n_eff = 0;
  while (n_eff < sv.size() && sv(n_eff) > rank_tol * sv(0)) ++n_eff;

  PatternBasis basis;
  basis.n_eff = n_eff;
  basis.u_mat = svd.matrixU().leftCols(n_eff);
  basis.s = sv.head(n_eff);
  basis.v_mat = svd.matrixV().leftCols(n_eff);
  return basis;
}

CVec pattern_coder(const PatternBasis& basis, const PortModel& m, const AntennaCoder& b) {
  const CVec cur = port_currents(m, b);
  CVec w(basis.n_eff);
  for (int r = 0; r < basis.n_eff; ++r)
    w(r) = basis.s(r) * kern::cdotc(static_cast<std::size_t>(cur.size()), cur.data(), basis.v_mat.col(r).data());
  const double nrm = std::sqrt(kern::sumabs2(static_cast<std::size_t>(w.size()), w.data()));
  if (!(nrm > 1e-14 * basis.s(0) * cur.norm()))
    throw std::runtime_error("pattern_coder: degenerate coder (zero pattern before normalization)");
  w /= nrm;
  return w;
}

CVec radiation_pattern(const PortModel& m, const AntennaCoder& b, const PatternBasis& basis) {
  const CVec w = pattern_coder(basis, m, b);
  CVec e = CVec::Zero(basis.u_mat.rows());
  for (int r = 0; r < basis.n_eff; ++r)
    kern::caxpy(static_cast<std::size_t>(e.size()), std::conj(w(r)), basis.u_mat.col(r).data(), e.data());
  return e;
}

const CVec& PatternTable::get(const AntennaCoder& b) {
  auto key = b.str();
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  return cache_.emplace(std::move(key), pattern_coder(basis_, model_, b)).first->second;
}

}  // namespace pixsim
