#pragma once

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vfpk/grid.hpp"
#include "vfpk/hermite.hpp"

namespace testing {

// Adaptive Gauss–Kronrod on a finite interval.
template <class F>
double quad(F f, double a, double b, double tol = 1e-13) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, tol);
}

inline vfpk::Field random_field(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  vfpk::Field f(n);
  for (auto& v : f) v = u(rng);
  return f;
}

// Smooth positive density on a grid, mass normalized to one.
inline vfpk::Field random_density(const vfpk::SpatialGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double c = 2.0 * u(rng) - 1.0, w = 0.5 + u(rng), a = u(rng);
  vfpk::Field f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto p = g.point(i);
    double r2 = 0.0, s2 = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
      r2 += (p[d] - c) * (p[d] - c);
      s2 += (p[d] + c) * (p[d] + c);
    }
    f[i] = std::exp(-r2 / (2 * w * w)) + a * std::exp(-s2);
  }
  const double m = g.integrate(f);
  for (auto& v : f) v /= m;
  return f;
}

inline vfpk::Coeffs random_coeffs(int nv, int nx, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  vfpk::Coeffs c(nv, nx);
  for (int i = 0; i < nv; ++i)
    for (int j = 0; j < nx; ++j) c(i, j) = n(rng);
  return c;
}

inline double max_abs_diff(const vfpk::Field& a, const vfpk::Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing
