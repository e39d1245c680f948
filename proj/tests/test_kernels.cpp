#include "doctest.h"

#include <complex>

#include "common.hpp"
#include "vfpk/diagnostics.hpp"
#include "vfpk/errors.hpp"
#include "vfpk/kernels.hpp"

using namespace vfpk;

namespace {

SpatialGrid odd_grid_3d(int n, double h) { return SpatialGrid::uniform(3, n, 0.5 * n * h); }

Field gaussian_density(const SpatialGrid& g) {
  Field r(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto p = g.point(i);
    double r2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) r2 += p[a] * p[a];
    r[i] = std::exp(-0.5 * r2) / std::pow(2 * M_PI, 0.5 * g.dim());
  }
  return r;
}

}  // namespace

TEST_CASE("pointwise kernel values") {
  CHECK(eval_kernel(InteractionKernel::coulomb(1.0, 3), {2, 0, 0}) == doctest::Approx(0.5));
  CHECK(eval_kernel(InteractionKernel::newton(1.0, 3), {2, 0, 0}) == doctest::Approx(-0.5));
  CHECK(eval_kernel(InteractionKernel::synchrotron(1.0), {-1, 0, 0}) == 0.0);
  CHECK(eval_kernel(InteractionKernel::riesz(2.0, 1.5, 2), {0, 4, 0}) == doctest::Approx(2.0 / 2.0));
  // Small-argument slope k_S(x)/x -> 8/9, extrapolated from two samples.
  const double a = synchrotron_profile(1e-4) / 1e-4, b = synchrotron_profile(1e-5) / 1e-5;
  CHECK(std::abs((100 * b - a) / 99 - 8.0 / 9.0) < 1e-9);
  // Profile against its defining closed form away from the series branch.
  for (double x : {0.01, 0.3, 2.0, 10.0}) {
    const double u = std::asinh(x);
    CHECK(synchrotron_profile(x) ==
          doctest::Approx(4 * std::sinh(4 * u / 3) * std::sinh(u / 3) / std::sinh(2 * u)).epsilon(1e-13));
    const double d = 1e-6;
    CHECK(synchrotron_profile_derivative(x) ==
          doctest::Approx((synchrotron_profile(x + d) - synchrotron_profile(x - d)) / (2 * d)).epsilon(1e-7));
  }
  CHECK_THROWS_AS(InteractionKernel::coulomb(1.0, 2), DomainError);
  CHECK_THROWS_AS(InteractionKernel::riesz(1.0, 0.9, 2), DomainError);
  CHECK_THROWS_AS(kernel_family_from_string("Yukawa"), DomainError);
}

TEST_CASE("Lebesgue exponents and applicability") {
  const auto c = InteractionKernel::coulomb(1.0, 3).lebesgue_exponents();
  CHECK(c.p == INFINITY);
  CHECK(c.q == 6.0);  // exact, so the critical index below is exactly 1/4
  CHECK(critical_smoothness(3, c.q) == 0.25);
  CHECK(InteractionKernel::coulomb(1.0, 3).theorem_applicable());
  const auto r = InteractionKernel::riesz(1.0, 1.25, 2).lebesgue_exponents();
  CHECK(r.q == doctest::Approx(8.0 / 3.0));
  CHECK(InteractionKernel::riesz(1.0, 1.25, 2).theorem_applicable());
}

TEST_CASE("even/odd split") {
  const auto g = SpatialGrid::uniform(1, 64, 6.0);
  const auto s = even_odd_split(InteractionKernel::synchrotron(1.0), g);
  for (int m = -(g.nodes(0) - 1); m < g.nodes(0); ++m) {
    if (m == 0) continue;
    const double x = m * g.spacing(0);
    CHECK(s.even.at({m, 0, 0}) == doctest::Approx(0.5 * synchrotron_profile(std::abs(x))).epsilon(1e-14));
    CHECK(s.odd.at({m, 0, 0}) == doctest::Approx(-s.odd.at({-m, 0, 0})));
  }
  const auto g3 = SpatialGrid::uniform(3, 8, 3.0);
  const auto c = even_odd_split(InteractionKernel::coulomb(1.0, 3), g3);
  for (double v : c.odd.values) CHECK(v == 0.0);
  const auto z = even_odd_split(InteractionKernel::zero(1), g);
  CHECK(z.even.identically_zero);
  CHECK(z.odd.identically_zero);
  CHECK_THROWS_AS(even_odd_split(InteractionKernel::synchrotron(1.0), SpatialGrid(1, {8}, {1.0}, {0.5})),
                  DomainError);
}

TEST_CASE("convolution: trivial kernels") {
  const auto g = SpatialGrid::uniform(1, 64, 6.0);
  std::mt19937_64 rng(3);
  const DensityField rho(g, testing::random_density(g, rng));
  for (double v : convolve(InteractionKernel::zero(1), rho)) CHECK(v == 0.0);
  for (double v : convolve(InteractionKernel::constant(2.5, 1), rho)) CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("Coulomb potential of a Gaussian matches erf(r/√2)/r") {
  const auto g = odd_grid_3d(49, 0.25);
  const auto psi = convolve(InteractionKernel::coulomb(1.0, 3), DensityField(g, gaussian_density(g)));
  const int c = 24;
  for (double x : {0.5, 1.0, 2.0}) {
    const int k = static_cast<int>(std::lround(x / 0.25));
    CHECK(std::abs(psi[g.ravel({c + k, c, c})] - std::erf(x / std::sqrt(2.0)) / x) < 1e-4);
  }
}

TEST_CASE("linearity, adjoint and symmetric-part identities") {
  std::mt19937_64 rng(7);
  const auto g = SpatialGrid::uniform(1, 96, 6.0);
  const auto g2 = SpatialGrid::uniform(2, 24, 4.0);
  struct Case {
    InteractionKernel k;
    SpatialGrid g;
  };
  for (const Case& c : {Case{InteractionKernel::synchrotron(0.7), g}, Case{InteractionKernel::riesz(1.0, 1.5, 2), g2}}) {
    const Convolver K(tabulate_kernel(c.k, c.g));
    const Convolver Ke(even_odd_split(c.k, c.g).even);
    const std::size_t n = c.g.size();
    const Field a = testing::random_field(n, rng), b = testing::random_field(n, rng);
    Field comb(n);
    for (std::size_t i = 0; i < n; ++i) comb[i] = 2.0 * a[i] - 0.5 * b[i];
    const Field ka = K.apply(a), kb = K.apply(b), kc = K.apply(comb);
    double scale = 0.0, err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err = std::max(err, std::abs(kc[i] - (2.0 * ka[i] - 0.5 * kb[i])));
      scale = std::max(scale, std::abs(kc[i]));
    }
    CHECK(err <= 1e-12 * std::max(1.0, scale));
    CHECK(std::abs(dot(c.g, ka, b) - dot(c.g, a, K.apply(b, true))) < 1e-10);
    // ⟨Kh, h⟩ only sees the even part.
    Field h = a;
    double mean = 0.0;
    for (double v : h) mean += v;
    for (auto& v : h) v -= mean / n;
    CHECK(std::abs(dot(c.g, K.apply(h), h) - dot(c.g, Ke.apply(h), h)) < 1e-10);
  }
}

TEST_CASE("Fourier multipliers of even/odd parts") {
  const auto g = SpatialGrid::uniform(1, 64, 6.0);
  const auto s = even_odd_split(InteractionKernel::synchrotron(1.0), g);
  for (const auto& z : Convolver(s.even).multiplier()) CHECK(std::abs(z.imag()) < 1e-10);
  for (const auto& z : Convolver(s.odd).multiplier()) CHECK(std::abs(z.real()) < 1e-10);
}

TEST_CASE("gradient of the convolution is second-order consistent") {
  auto err = [](int n) {
    const auto g = SpatialGrid::uniform(1, n, 8.0);
    Field r(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) r[i] = std::exp(-std::pow(g.coord(0, i) - 0.3, 2));
    const auto k = InteractionKernel::synchrotron(1.0);
    const Convolver K(tabulate_kernel(k, g));
    const Field psi = K.apply(r);
    const Field dpsi = K.gradient(r)[0];
    double e = 0.0;
    const double h = g.spacing(0);
    for (int i = n / 4; i < 3 * n / 4; ++i) e = std::max(e, std::abs((psi[i + 1] - psi[i - 1]) / (2 * h) - dpsi[i]));
    return e;
  };
  const double slope = std::log2(err(128) / err(256));
  CHECK(slope > 1.7);
}

TEST_CASE("zeta for Coulomb at the origin") {
  // ∫ e^{-|y|²/2}(2π)^{-3/2} / |y| dy = √(2/π).
  const auto g = odd_grid_3d(49, 0.25);
  const Convolver K(tabulate_kernel(InteractionKernel::coulomb(1.0, 3), g));
  const Field psi = K.apply(gaussian_density(g), true);
  double mx = 0.0;
  for (double v : psi) mx = std::max(mx, v);
  CHECK(mx == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(0.02));
}

TEST_CASE("coercivity estimates") {
  const auto g3 = SpatialGrid::uniform(3, 12, 4.0);
  CHECK(coercivity_estimate(InteractionKernel::coulomb(1.0, 3), g3, 0.5).kappa_lower_even == 0.0);
  const double a = coercivity_estimate(InteractionKernel::newton(0.1, 3), g3, 0.5).kappa_lower_even;
  const double b = coercivity_estimate(InteractionKernel::newton(0.3, 3), g3, 0.5).kappa_lower_even;
  CHECK(a > 0);
  CHECK(b == doctest::Approx(3.0 * a).epsilon(1e-12));
  const auto z = coercivity_estimate(InteractionKernel::zero(1), SpatialGrid::uniform(1, 32, 4.0), 0.5);
  CHECK(z.kappa_lower_even == 0.0);
  CHECK(z.kappa_upper_even == 0.0);
  CHECK(z.kappa_upper_odd == 0.0);
}

TEST_CASE("positivity verification") {
  const auto g3 = SpatialGrid::uniform(3, 10, 4.0);
  CHECK(verify_positivity(InteractionKernel::coulomb(1.0, 3), g3, 20).passed);
  const auto n = verify_positivity(InteractionKernel::newton(1.0, 3), g3, 20);
  CHECK_FALSE(n.passed);
  CHECK(n.shift_constant == INFINITY);
  const auto g = SpatialGrid::uniform(1, 256, 8.0);
  CHECK(verify_positivity(InteractionKernel::synchrotron(1.0), g, 50).passed);
  double mn = 1.0;
  for (int i = -4000; i <= 4000; ++i) mn = std::min(mn, synchrotron_profile(i * 0.005));
  CHECK(mn >= 0.0);
}
