#pragma once

// Complex double vector kernels used by the candidate-evaluation inner loops.
// A scalar reference implementation always exists; an AVX2+FMA variant is
// selected at runtime when the CPU supports it. Override with
// PIXSIM_KERNELS=scalar|avx2 in the environment.

#include <complex>
#include <cstddef>

namespace pixsim::kern {

using cxd = std::complex<double>;

namespace scalar {
cxd cdotc(std::size_t n, const cxd* x, const cxd* y);    // sum conj(x_i) * y_i
cxd cdotu(std::size_t n, const cxd* x, const cxd* y);    // sum x_i * y_i
double sumabs2(std::size_t n, const cxd* x);             // sum |x_i|^2
void caxpy(std::size_t n, cxd a, const cxd* x, cxd* y);  // y += a * x
}  // namespace scalar

#if defined(PIXSIM_WITH_AVX2)
namespace avx2 {
cxd cdotc(std::size_t n, const cxd* x, const cxd* y);
cxd cdotu(std::size_t n, const cxd* x, const cxd* y);
double sumabs2(std::size_t n, const cxd* x);
void caxpy(std::size_t n, cxd a, const cxd* x, cxd* y);
}  // namespace avx2
#endif

struct KernelTable {
  cxd (*cdotc)(std::size_t, const cxd*, const cxd*);
  cxd (*cdotu)(std::size_t, const cxd*, const cxd*);
  double (*sumabs2)(std::size_t, const cxd*);
  void (*caxpy)(std::size_t, cxd, const cxd*, cxd*);
  const char* name;
};

// Resolved once on first use.
const KernelTable& active();
const char* active_backend();
bool avx2_available();

inline cxd cdotc(std::size_t n, const cxd* x, const cxd* y) { return active().cdotc(n, x, y); }
inline cxd cdotu(std::size_t n, const cxd* x, const cxd* y) { return active().cdotu(n, x, y); }
inline double sumabs2(std::size_t n, const cxd* x) { return active().sumabs2(n, x); }
inline void caxpy(std::size_t n, cxd a, const cxd* x, cxd* y) { active().caxpy(n, a, x, y); }

}  // namespace pixsim::kern
