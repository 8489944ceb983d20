#include "pixsim/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace pixsim::kern {

namespace {

KernelTable make_scalar_table() {
  return {&scalar::cdotc, &scalar::cdotu, &scalar::sumabs2, &scalar::caxpy, "scalar"};
}

#if defined(PIXSIM_WITH_AVX2)
KernelTable make_avx2_table() {
  return {&avx2::cdotc, &avx2::cdotu, &avx2::sumabs2, &avx2::caxpy, "avx2"};
}
#endif

bool cpu_has_avx2() {
#if defined(PIXSIM_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

KernelTable resolve() {
  const char* pref = std::getenv("PIXSIM_KERNELS");
  if (pref && std::strcmp(pref, "scalar") == 0) return make_scalar_table();
#if defined(PIXSIM_WITH_AVX2)
  if (pref && std::strcmp(pref, "avx2") == 0 && cpu_has_avx2()) return make_avx2_table();
  if (!pref && cpu_has_avx2()) return make_avx2_table();
#endif
  return make_scalar_table();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable table = resolve();
  return table;
}

const char* active_backend() { return active().name; }

bool avx2_available() { return cpu_has_avx2(); }

}  // namespace pixsim::kern
