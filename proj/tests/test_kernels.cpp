#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "pixsim/kernels.hpp"

using pixsim::kern::cxd;

namespace {

std::vector<cxd> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<cxd> v(n);
  for (auto& x : v) x = cxd(d(rng), d(rng));
  return v;
}

double abs_bound(const std::vector<cxd>& x, const std::vector<cxd>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i]) * std::abs(y[i]);
  return s;
}

}  // namespace

TEST_CASE("scalar kernels match a naive std::complex loop") {
  std::mt19937_64 rng(7);
  for (std::size_t n : {0u, 1u, 2u, 3u, 5u, 17u}) {
    auto x = random_vec(n, rng), y = random_vec(n, rng);
    cxd dc{0, 0}, du{0, 0};
    double s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dc += std::conj(x[i]) * y[i];
      du += x[i] * y[i];
      s2 += std::norm(x[i]);
    }
    CHECK(std::abs(pixsim::kern::scalar::cdotc(n, x.data(), y.data()) - dc) <= 1e-13 * (1.0 + abs_bound(x, y)));
    CHECK(std::abs(pixsim::kern::scalar::cdotu(n, x.data(), y.data()) - du) <= 1e-13 * (1.0 + abs_bound(x, y)));
    CHECK(pixsim::kern::scalar::sumabs2(n, x.data()) == doctest::Approx(s2).epsilon(1e-13));

    auto z = random_vec(n, rng);
    auto z2 = z;
    const cxd a{0.3, -1.7};
    pixsim::kern::scalar::caxpy(n, a, x.data(), z.data());
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(z[i] - (z2[i] + a * x[i])) <= 1e-13);
  }
}

#if defined(PIXSIM_WITH_AVX2)
TEST_CASE("avx2 kernels agree with scalar reference across sizes") {
  if (!pixsim::kern::avx2_available()) return;
  std::mt19937_64 rng(42);
  for (std::size_t n = 0; n <= 130; ++n) {
    auto x = random_vec(n, rng), y = random_vec(n, rng);
    const double bound = 1e-13 * (1.0 + abs_bound(x, y));

    CHECK(std::abs(pixsim::kern::avx2::cdotc(n, x.data(), y.data()) -
                   pixsim::kern::scalar::cdotc(n, x.data(), y.data())) <= bound);
    CHECK(std::abs(pixsim::kern::avx2::cdotu(n, x.data(), y.data()) -
                   pixsim::kern::scalar::cdotu(n, x.data(), y.data())) <= bound);
    CHECK(std::abs(pixsim::kern::avx2::sumabs2(n, x.data()) - pixsim::kern::scalar::sumabs2(n, x.data())) <=
          1e-13 * (1.0 + pixsim::kern::scalar::sumabs2(n, x.data())));

    auto za = random_vec(n, rng);
    auto zs = za;
    const cxd a{-0.9, 0.4};
    pixsim::kern::avx2::caxpy(n, a, x.data(), za.data());
    pixsim::kern::scalar::caxpy(n, a, x.data(), zs.data());
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(za[i] - zs[i]) <= 1e-14);
  }
}
#endif

TEST_CASE("dispatch resolves to a working backend") {
  const char* name = pixsim::kern::active_backend();
  CHECK((std::string(name) == "scalar" || std::string(name) == "avx2"));
  std::mt19937_64 rng(3);
  auto x = random_vec(9, rng), y = random_vec(9, rng);
  const cxd via_dispatch = pixsim::kern::cdotc(9, x.data(), y.data());
  const cxd via_scalar = pixsim::kern::scalar::cdotc(9, x.data(), y.data());
  CHECK(std::abs(via_dispatch - via_scalar) <= 1e-12);
}

TEST_CASE("dot identities hold on random data") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    auto x = random_vec(33, rng), y = random_vec(33, rng);
    // cdotc(x,x) is real and equals sumabs2
    const cxd xx = pixsim::kern::cdotc(33, x.data(), x.data());
    CHECK(std::abs(xx.imag()) <= 1e-12);
    CHECK(xx.real() == doctest::Approx(pixsim::kern::sumabs2(33, x.data())).epsilon(1e-12));
    // cdotc(x,y) = conj(cdotc(y,x))
    const cxd xy = pixsim::kern::cdotc(33, x.data(), y.data());
    const cxd yx = pixsim::kern::cdotc(33, y.data(), x.data());
    CHECK(std::abs(xy - std::conj(yx)) <= 1e-12 * (1.0 + std::abs(xy)));
  }
}
