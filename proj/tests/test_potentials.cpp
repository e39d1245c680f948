#include "doctest.h"

#include "common.hpp"
#include "vfpk/errors.hpp"
#include "vfpk/potentials.hpp"

using namespace vfpk;

TEST_CASE("quadratic potential values") {
  const auto p = ConfinementPotential::quadratic(1);
  const auto at0 = eval_potential(p, {0, 0, 0});
  CHECK(at0.value == doctest::Approx(std::log(std::sqrt(2 * M_PI))).epsilon(1e-15));
  CHECK(at0.gradient[0] == 0.0);
  CHECK(at0.hessian_norm == doctest::Approx(1.0));
  CHECK(eval_potential(p, {2, 0, 0}).gradient[0] == doctest::Approx(2.0));
  CHECK(eval_potential(ConfinementPotential::power_growth(1.0, 1), {0, 0, 0}).gradient[0] == 0.0);
}

TEST_CASE("normalization against quadrature oracles") {
  const auto g = SpatialGrid::uniform(1, 2048, 10.0);
  const auto q = normalize(ConfinementPotential::quadratic(1), g);
  CHECK(std::abs(q.additive_constant - std::log(std::sqrt(2 * M_PI))) < 1e-8);

  const auto p = normalize(ConfinementPotential::power_growth(1.0, 1), g);
  const auto s = sample_potential(p, g);
  Field w(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) w[i] = std::exp(-s.value[i]);
  CHECK(std::abs(g.integrate(w) - 1.0) < 1e-10);
  // Independent oracle for the normalizer of e^{-(1+x²)}.
  const double z = testing::quad([](double x) { return std::exp(-(1 + x * x)); }, -10, 10);
  CHECK(std::abs(p.additive_constant - std::log(z)) < 1e-8);
}

TEST_CASE("normalization is idempotent") {
  const auto g = SpatialGrid::uniform(2, 96, 12.0);
  for (const auto& p0 : {ConfinementPotential::quadratic(2), ConfinementPotential::power_growth(0.5, 2),
                         ConfinementPotential::log_power(1.5, 2)}) {
    const auto a = normalize(p0, g);
    const auto b = normalize(a, g);
    CHECK(std::abs(a.additive_constant - b.additive_constant) < 1e-12);
  }
}

TEST_CASE("normalization rejects boxes that truncate the mass") {
  const auto g = SpatialGrid::uniform(1, 64, 2.0);
  CHECK_THROWS_AS(normalize(ConfinementPotential::quadratic(1), g), DomainError);
}

TEST_CASE("gradients match centred differences at second order") {
  const std::vector<ConfinementPotential> ps{ConfinementPotential::power_growth(0.7, 2),
                                             ConfinementPotential::log_power(1.3, 2),
                                             ConfinementPotential::log_power(0.6, 1)};
  for (const auto& p : ps) {
    const Point x{0.9, p.dim > 1 ? -0.4 : 0.0, 0.0};
    auto err = [&](double h) {
      double e = 0.0;
      for (int a = 0; a < p.dim; ++a) {
        Point xp = x, xm = x;
        xp[a] += h;
        xm[a] -= h;
        const double fd = (eval_potential(p, xp).value - eval_potential(p, xm).value) / (2 * h);
        e = std::max(e, std::abs(fd - eval_potential(p, x).gradient[a]));
      }
      return e;
    };
    const double slope = std::log2(err(1e-2) / err(5e-3));
    CHECK(slope == doctest::Approx(2.0).epsilon(0.1));
  }
}

TEST_CASE("tabulated potential interpolates and is translation-consistent") {
  const auto g = SpatialGrid::uniform(1, 256, 8.0);
  Field v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = 0.5 * std::pow(g.coord(0, i), 2);
  const auto p = ConfinementPotential::tabulated(g, v);
  CHECK(eval_potential(p, {g.coord(0, 100), 0, 0}).value == doctest::Approx(v[100]).epsilon(1e-12));
  CHECK(eval_potential(p, {1.234, 0, 0}).value == doctest::Approx(0.5 * 1.234 * 1.234).epsilon(1e-3));
  CHECK(eval_potential(p, {1.234, 0, 0}).gradient[0] == doctest::Approx(1.234).epsilon(1e-3));
  CHECK_THROWS_AS(eval_potential(p, {9.0, 0, 0}), DomainError);
}

TEST_CASE("confinement assumption report") {
  const auto g = SpatialGrid::uniform(1, 512, 10.0);
  const auto q = verify_assumption_confinement(ConfinementPotential::quadratic(1), g, {0.0, 0.5, 1.0});
  CHECK(q.smoothness_pairs[0].second == doctest::Approx(1.0));
  CHECK(q.smoothness_pairs[2].second <= 1.0);
  double gmax = 0.0;
  for (int i = 0; i < g.nodes(0); ++i) gmax = std::max(gmax, std::abs(g.coord(0, i)));
  for (const auto& [eps, c] : q.smoothness_pairs) CHECK(c + eps * gmax >= 1.0 - 1e-12);
  CHECK(q.mass_defect < 1e-10);
  CHECK(q.poincare_constant == doctest::Approx(1.0).epsilon(0.02));

  const auto p = verify_assumption_confinement(ConfinementPotential::power_growth(1.0, 1), g,
                                               {0.0, 0.25, 0.5, 1.0});
  for (std::size_t k = 1; k < p.smoothness_pairs.size(); ++k) {
    CHECK(std::isfinite(p.smoothness_pairs[k].second));
    CHECK(p.smoothness_pairs[k].second <= p.smoothness_pairs[k - 1].second);
  }
  CHECK(p.r_v > 0);
}

TEST_CASE("family names round-trip") {
  for (auto f : {PotentialFamily::Quadratic, PotentialFamily::PowerGrowth, PotentialFamily::LogPower,
                 PotentialFamily::Tabulated})
    CHECK(potential_family_from_string(to_string(f)) == f);
  CHECK_THROWS(potential_family_from_string("Cubic"));
}
