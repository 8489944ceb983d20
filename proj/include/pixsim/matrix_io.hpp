#pragma once

// Text matrix format: first line "R C", then R lines of 2C decimal floats,
// interleaved (re, im) per entry. Values are printed with max_digits10 so a
// write/read round trip is exact.

#include <iosfwd>
#include <string>

#include "pixsim/types.hpp"

namespace pixsim {

void write_complex_matrix(std::ostream& os, const CMat& m);
CMat read_complex_matrix(std::istream& is, const std::string& what);

void write_complex_matrix_file(const std::string& path, const CMat& m);
CMat read_complex_matrix_file(const std::string& path);

}  // namespace pixsim
