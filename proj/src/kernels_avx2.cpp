// AVX2+FMA kernels for interleaved complex<double>. One __m256d carries two
// complex values; conjugation/sign handling is folded into the final
// horizontal reduction so the hot loop is two FMAs per pair of elements.

#include "pixsim/kernels.hpp"

#if defined(PIXSIM_WITH_AVX2)

#include <immintrin.h>

namespace pixsim::kern::avx2 {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

// Accumulates accA = sum x.*y and accB = sum swap(x).*y over the prefix that
// fits in vector registers; returns the number of elements consumed.
inline std::size_t dot_accumulate(std::size_t n, const double* x, const double* y, __m256d& accA, __m256d& accB) {
  __m256d a0 = _mm256_setzero_pd(), b0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd(), b1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv0 = _mm256_loadu_pd(x + 2 * i);
    __m256d yv0 = _mm256_loadu_pd(y + 2 * i);
    __m256d xv1 = _mm256_loadu_pd(x + 2 * i + 4);
    __m256d yv1 = _mm256_loadu_pd(y + 2 * i + 4);
    a0 = _mm256_fmadd_pd(xv0, yv0, a0);
    b0 = _mm256_fmadd_pd(_mm256_permute_pd(xv0, 0x5), yv0, b0);
    a1 = _mm256_fmadd_pd(xv1, yv1, a1);
    b1 = _mm256_fmadd_pd(_mm256_permute_pd(xv1, 0x5), yv1, b1);
  }
  for (; i + 2 <= n; i += 2) {
    __m256d xv = _mm256_loadu_pd(x + 2 * i);
    __m256d yv = _mm256_loadu_pd(y + 2 * i);
    a0 = _mm256_fmadd_pd(xv, yv, a0);
    b0 = _mm256_fmadd_pd(_mm256_permute_pd(xv, 0x5), yv, b0);
  }
  accA = _mm256_add_pd(a0, a1);
  accB = _mm256_add_pd(b0, b1);
  return i;
}

const __m256d kSignEven = _mm256_set_pd(1.0, -1.0, 1.0, -1.0);  // lanes [-,+,-,+]
const __m256d kSignOdd = _mm256_set_pd(-1.0, 1.0, -1.0, 1.0);   // lanes [+,-,+,-]

}  // namespace

cxd cdotc(std::size_t n, const cxd* xc, const cxd* yc) {
  const double* x = reinterpret_cast<const double*>(xc);
  const double* y = reinterpret_cast<const double*>(yc);
  __m256d accA, accB;
  std::size_t i = dot_accumulate(n, x, y, accA, accB);
  double re = hsum(accA);
  double im = hsum(_mm256_mul_pd(accB, kSignEven));
  for (; i < n; ++i) {
    const double xr = x[2 * i], xi = x[2 * i + 1], yr = y[2 * i], yi = y[2 * i + 1];
    re += xr * yr + xi * yi;
    im += xr * yi - xi * yr;
  }
  return {re, im};
}

cxd cdotu(std::size_t n, const cxd* xc, const cxd* yc) {
  const double* x = reinterpret_cast<const double*>(xc);
  const double* y = reinterpret_cast<const double*>(yc);
  __m256d accA, accB;
  std::size_t i = dot_accumulate(n, x, y, accA, accB);
  double re = hsum(_mm256_mul_pd(accA, kSignOdd));
  double im = hsum(accB);
  for (; i < n; ++i) {
    const double xr = x[2 * i], xi = x[2 * i + 1], yr = y[2 * i], yi = y[2 * i + 1];
    re += xr * yr - xi * yi;
    im += xr * yi + xi * yr;
  }
  return {re, im};
}

double sumabs2(std::size_t n, const cxd* xc) {
  const double* x = reinterpret_cast<const double*>(xc);
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v0 = _mm256_loadu_pd(x + 2 * i);
    __m256d v1 = _mm256_loadu_pd(x + 2 * i + 4);
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
    acc1 = _mm256_fmadd_pd(v1, v1, acc1);
  }
  for (; i + 2 <= n; i += 2) {
    __m256d v = _mm256_loadu_pd(x + 2 * i);
    acc0 = _mm256_fmadd_pd(v, v, acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1];
  return acc;
}

void caxpy(std::size_t n, cxd a, const cxd* xc, cxd* yc) {
  const double* x = reinterpret_cast<const double*>(xc);
  double* y = reinterpret_cast<double*>(yc);
  const double ar = a.real(), ai = a.imag();
  const __m256d arv = _mm256_set1_pd(ar);
  const __m256d aiv = _mm256_set_pd(ai, -ai, ai, -ai);  // [-ai, +ai, -ai, +ai]
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d xv = _mm256_loadu_pd(x + 2 * i);
    __m256d yv = _mm256_loadu_pd(y + 2 * i);
    yv = _mm256_fmadd_pd(aiv, _mm256_permute_pd(xv, 0x5), yv);
    yv = _mm256_fmadd_pd(arv, xv, yv);
    _mm256_storeu_pd(y + 2 * i, yv);
  }
  for (; i < n; ++i) {
    const double xr = x[2 * i], xi = x[2 * i + 1];
    y[2 * i] += ar * xr - ai * xi;
    y[2 * i + 1] += ar * xi + ai * xr;
  }
}

}  // namespace pixsim::kern::avx2

#endif  // PIXSIM_WITH_AVX2
