#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pixsim {

using cxd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// Switch-state bit vector for one pixel antenna (one bit per RF switch).
struct AntennaCoder {
  std::vector<std::uint8_t> bits;

  AntennaCoder() = default;
  explicit AntennaCoder(std::vector<std::uint8_t> b) : bits(std::move(b)) {}
  AntennaCoder(std::initializer_list<int> b) {
    bits.reserve(b.size());
    for (int v : b) bits.push_back(v ? 1 : 0);
  }

  static AntennaCoder zeros(int q) { return AntennaCoder(std::vector<std::uint8_t>(static_cast<std::size_t>(q), 0)); }
  static AntennaCoder ones(int q) { return AntennaCoder(std::vector<std::uint8_t>(static_cast<std::size_t>(q), 1)); }

  int size() const { return static_cast<int>(bits.size()); }

  // '0'/'1' string; doubles as a cache/map key.
  std::string str() const {
    std::string s(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i]) s[i] = '1';
    return s;
  }

  bool operator==(const AntennaCoder& o) const { return bits == o.bits; }
  bool operator!=(const AntennaCoder& o) const { return bits != o.bits; }
};

inline bool valid_coder(const AntennaCoder& b, int q) {
  if (b.size() != q) return false;
  for (auto v : b.bits)
    if (v > 1) return false;
  return true;
}

/// One user's reduced channel (n_eff x n).
struct ReducedChannel {
  CMat h_bar;
  int user = 0;
};

}  // namespace pixsim
