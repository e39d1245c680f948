#include "doctest.h"

#include "common.hpp"
#include "vfpk/errors.hpp"
#include "vfpk/grid.hpp"

using namespace vfpk;

TEST_CASE("cell-centred coordinates and ravel order") {
  const SpatialGrid g(2, {4, 3}, {2.0, 1.5});
  CHECK(g.size() == 12);
  CHECK(g.spacing(0) == doctest::Approx(1.0));
  CHECK(g.coord(0, 0) == doctest::Approx(-1.5));
  CHECK(g.coord(1, 2) == doctest::Approx(1.0));
  CHECK(g.stride(1) == 1);
  CHECK(g.stride(0) == 3);
  for (std::size_t f = 0; f < g.size(); ++f) CHECK(g.ravel(g.unravel(f)) == f);
  CHECK(g.symmetric_about_origin());
  CHECK(g.isotropic());
  CHECK_FALSE(SpatialGrid(2, {4, 3}, {2.0, 1.0}).isotropic());
  CHECK(SpatialGrid::uniform(3, 8, 1.0).isotropic());
}

TEST_CASE("midpoint quadrature of a Gaussian") {
  const auto g = SpatialGrid::uniform(1, 512, 10.0);
  Field f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::exp(-0.5 * std::pow(g.coord(0, i), 2));
  CHECK(g.integrate(f) == doctest::Approx(std::sqrt(2 * M_PI)).epsilon(1e-12));
  const DensityField rho(g, f);
  CHECK(rho.mass() == doctest::Approx(std::sqrt(2 * M_PI)));
}

TEST_CASE("off-centre boxes and boundary maxima") {
  const SpatialGrid g(1, {10}, {1.0}, {3.0});
  CHECK(g.coord(0, 0) == doctest::Approx(2.1));
  CHECK_FALSE(g.symmetric_about_origin());
  Field f(10, 0.0);
  f[0] = -2.0;
  f[5] = 7.0;
  CHECK(g.boundary_max_abs(f) == 2.0);
}

TEST_CASE("norms") {
  const auto g = SpatialGrid::uniform(1, 4, 1.0);
  const Field f{1, -1, 2, 0};
  CHECK(norm_lp(g, f, 1) == doctest::Approx(2.0));
  CHECK(norm_lp(g, f, 2) == doctest::Approx(std::sqrt(3.0)));
  CHECK(norm_lp(g, f, INFINITY) == 2.0);
  CHECK(dot(g, f, f) == doctest::Approx(3.0));
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS_AS(SpatialGrid(1, {0}, {1.0}), DomainError);
  CHECK_THROWS_AS(SpatialGrid(4, {2}, {1.0}), DomainError);
  CHECK_THROWS_AS(SpatialGrid(1, {4}, {-1.0}), DomainError);
}
