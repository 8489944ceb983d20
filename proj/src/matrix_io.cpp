#include "pixsim/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace pixsim {

namespace {
void format_double(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*g", std::numeric_limits<double>::max_digits10, v);
  os << buf;
}
}  // namespace

void write_complex_matrix(std::ostream& os, const CMat& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ' ';
      format_double(os, m(r, c).real());
      os << ' ';
      format_double(os, m(r, c).imag());
    }
    os << '\n';
  }
}

CMat read_complex_matrix(std::istream& is, const std::string& what) {
  long rows = -1, cols = -1;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0)
    throw std::runtime_error("matrix parse failure (" + what + "): bad header");
  CMat m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      double re, im;
      if (!(is >> re >> im))
        throw std::runtime_error("matrix parse failure (" + what + "): truncated at row " + std::to_string(r));
      m(r, c) = cxd(re, im);
    }
  }
  return m;
}

void write_complex_matrix_file(const std::string& path, const CMat& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  write_complex_matrix(os, m);
}

CMat read_complex_matrix_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_complex_matrix(is, path);
}

}  // namespace pixsim
