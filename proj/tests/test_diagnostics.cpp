#include "doctest.h"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "common.hpp"
#include "vfpk/diagnostics.hpp"
#include "vfpk/errors.hpp"
#include "vfpk/linear.hpp"
#include "vfpk/spectral.hpp"
#include "vfpk/steady.hpp"

using namespace vfpk;

namespace {

struct Setup {
  SpatialGrid grid;
  InteractionKernel kernel;
  SteadyProblem pb;
  SteadyState ss;
  Setup(int nx, double L, InteractionKernel k)
      : grid(SpatialGrid::uniform(1, nx, L)), kernel(k), pb(ConfinementPotential::quadratic(1), k, grid),
        ss(solve_fixed_point(pb)) {}
};

// Even kernel with a positive transform: I e^{-x²}.
InteractionKernel gaussian_kernel(double strength) {
  std::vector<double> x, k;
  for (int i = -800; i <= 800; ++i) {
    x.push_back(i * 0.025);
    k.push_back(std::exp(-x.back() * x.back()));
  }
  return InteractionKernel::lipschitz_table(x, k, 1, strength);
}

Coeffs mean_free(const LinearStructure& ls, Coeffs u) {
  // Removes the √ρ★ component of the macroscopic row.
  double num = 0, den = 0;
  for (int i = 0; i < ls.n_x(); ++i) {
    num += u(0, i) * ls.sqrt_rho()[i];
    den += ls.sqrt_rho()[i] * ls.sqrt_rho()[i];
  }
  for (int i = 0; i < ls.n_x(); ++i) u(0, i) -= num / den * ls.sqrt_rho()[i];
  return u;
}

// Random perturbation that is smooth in x, decays in v and is weighted towards the bulk.
Coeffs smooth_coeffs(const LinearStructure& ls, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Coeffs u(ls.n_v(), ls.n_x());
  for (int m = 0; m < ls.n_v(); ++m) {
    const double a = n(rng), b = n(rng), c = n(rng);
    for (int i = 0; i < ls.n_x(); ++i) {
      const double x = ls.grid().coord(0, i);
      u(m, i) = (a + b * std::sin(x + c)) * std::exp(-0.25 * x * x) / (1.0 + m);
    }
  }
  return u;
}

}  // namespace

TEST_CASE("free energy pieces at and near the steady state") {
  const Setup s(256, 8.0, InteractionKernel::zero(1));
  const auto split = even_odd_split(s.kernel, s.grid);
  const FreeEnergyEvaluator fe(s.grid, 24, s.pb.v.value, split, 1.5);
  PhaseSpaceState F(s.grid, 24);
  for (int i = 0; i < 256; ++i) F.coeffs(0, i) = s.ss.rho_star[i];
  const auto at = fe.evaluate(F);
  const double e_min = -0.5 * std::log(2 * M_PI);  // entropy measured against the Lebesgue density ρ(x) g(v)
  CHECK(at.energy == doctest::Approx(e_min).epsilon(1e-12));
  CHECK(std::abs(at.dissipation) < 1e-14);
  CHECK(at.odd_work == 0.0);
  // ρ★ M(v - b): ∂_v log(F/M) = b, so dissipation ν b² and excess b²/2.
  const double b = 0.5;
  const auto c = shifted_maxwellian_coeffs(b, 24);
  for (int i = 0; i < 256; ++i)
    for (int n = 0; n < 24; ++n) F.coeffs(n, i) = s.ss.rho_star[i] * c[n];
  const auto sh = fe.evaluate(F);
  CHECK(sh.dissipation == doctest::Approx(1.5 * b * b).epsilon(1e-10));
  CHECK(sh.energy == doctest::Approx(e_min + 0.5 * b * b).epsilon(1e-10));
}

TEST_CASE("twisted norm") {
  std::mt19937_64 rng(3);
  SUBCASE("zero kernel: equals the L2(F★) norm") {
    const Setup s(64, 9.0, InteractionKernel::zero(1));
    const LinearStructure ls(s.ss, s.kernel, 6, 1.0);
    for (int t = 0; t < 10; ++t) {
      const auto u = testing::random_coeffs(6, 64, rng);
      CHECK(ls.twisted_sq(u) == doctest::Approx(ls.l2_sq(u)).epsilon(1e-14));
      CHECK(twisted_norm(ls, u) == doctest::Approx(std::sqrt(ls.l2_sq(u))).epsilon(1e-14));
    }
  }
  SUBCASE("positive-definite even kernel: l2 <= twisted <= (1 + I√π max ρ★) l2") {
    const double I = 0.4;
    const Setup s(64, 9.0, gaussian_kernel(I));
    const LinearStructure ls(s.ss, s.kernel, 6, 1.0);
    double mr = 0;
    for (double v : s.ss.rho_star.values()) mr = std::max(mr, v);
    for (int t = 0; t < 20; ++t) {
      const auto u = testing::random_coeffs(6, 64, rng);
      CHECK(ls.twisted_sq(u) >= ls.l2_sq(u));
      CHECK(ls.twisted_sq(u) <= (1.0 + I * std::sqrt(M_PI) * mr) * ls.l2_sq(u) * (1 + 1e-12));
    }
  }
}

TEST_CASE("macroscopic elliptic solve matches a dense oracle") {
  const Setup s(128, 9.0, InteractionKernel::zero(1));
  const LinearStructure ls(s.ss, s.kernel, 4, 1.0);
  const int n = 128;
  const double h = s.grid.spacing(0);
  // B0 = centred difference conjugated by √ρ★, built from scratch.
  Field sr(n);
  for (int i = 0; i < n; ++i) sr[i] = std::sqrt(s.ss.rho_star[i]);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double r = i + 1 < n ? sr[i + 1] : 0.0, l = i > 0 ? sr[i - 1] : 0.0;
    B(i, i) = -(r - l) / (2 * h) / sr[i];
    if (i + 1 < n) B(i, i + 1) = 1 / (2 * h);
    if (i > 0) B(i, i - 1) = -1 / (2 * h);
  }
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n) + B.transpose() * B;
  std::mt19937_64 rng(8);
  Field r = testing::random_field(n, rng);
  {
    Coeffs u = Coeffs::Zero(4, n);
    for (int i = 0; i < n; ++i) u(0, i) = r[i];
    u = mean_free(ls, u);
    for (int i = 0; i < n; ++i) r[i] = u(0, i);
  }
  LinearStructure::CgInfo info;
  const Field g = ls.solve_dms_elliptic(r, &info);
  const Eigen::VectorXd ref = M.ldlt().solve(Eigen::Map<const Eigen::VectorXd>(r.data(), n));
  double err = 0, mean = 0;
  for (int i = 0; i < n; ++i) {
    err = std::max(err, std::abs(g[i] - ref[i]));
    mean += h * g[i] * sr[i];
  }
  CHECK(err < 1e-8);
  CHECK(std::abs(mean) < 1e-10);
  CHECK(info.relative_residual <= 1e-10);
  const Field z = ls.solve_dms_elliptic(Field(n, 0.0));
  CHECK(testing::max_abs_diff(z, Field(n, 0.0)) == 0.0);
}

TEST_CASE("E0 sandwich and E11 equivalence") {
  std::mt19937_64 rng(21);
  for (const auto& k : {InteractionKernel::zero(1), InteractionKernel::synchrotron(0.1)}) {
    const Setup s(64, 9.0, k);
    const LinearStructure ls(s.ss, s.kernel, 8, 1.0);
    for (int t = 0; t < 30; ++t) {
      const auto u = testing::random_coeffs(8, 64, rng);
      const double tw = ls.twisted_sq(u), e = ls.e0(u, 0.25);
      CHECK(e >= 0.25 * tw - 1e-12);
      CHECK(e <= 0.75 * tw + 1e-12);
      CHECK(e0_functional(ls, u, 0.25) == doctest::Approx(e).epsilon(1e-14));
    }
  }
  // E11 ~ H¹ with explicit constants for the zero kernel (b² <= ac).
  const Setup s(64, 9.0, InteractionKernel::zero(1));
  const LinearStructure ls(s.ss, s.kernel, 8, 1.0);
  const E11Parameters p = default_e11_parameters(0.5);
  REQUIRE(p.b * p.b <= p.a * p.c);
  const double lo = std::min({0.125, 0.5 * p.a, 0.5 * p.c}), hi = std::max({0.75, 1.5 * p.a, 1.5 * p.c});
  for (int t = 0; t < 30; ++t) {
    const auto u = smooth_coeffs(ls, rng);
    const double h1 = ls.l2_sq(u) + ls.gradx_sq(u) + ls.gradv_sq(u);
    const double e = ls.e11(u, 0.25, p.a, p.b, p.c);
    CHECK(e >= lo * h1);
    CHECK(e <= hi * h1);
  }
}

TEST_CASE("dense operator bundle") {
  std::mt19937_64 rng(4);
  for (const auto& k : {InteractionKernel::zero(1), InteractionKernel::synchrotron(0.1)}) {
    const Setup s(24, 9.0, k);
    const LinearStructure ls(s.ss, s.kernel, 6, 2.0);
    const auto b = assemble_discrete_operators(ls);
    REQUIRE(b.gram_positive);
    const auto rep = verify_operator_identities(b, 2.0, 40, 9);
    CHECK(rep.t_skew <= 1e-8);
    CHECK(rep.l_sym <= 1e-8);
    CHECK(rep.pi_t_pi <= 1e-8);
    CHECK(rep.a_violations == 0);
    // Matrix-free operators agree with their dense columns.
    const auto u = testing::random_coeffs(6, 24, rng);
    Eigen::VectorXd x(u.size());
    for (int n = 0; n < 6; ++n)
      for (int i = 0; i < 24; ++i) x[n * 24 + i] = u(n, i);
    const Coeffs au = ls.apply_A(u);
    const Eigen::VectorXd ad = b.A * x;
    double e = 0;
    for (int n = 0; n < 6; ++n)
      for (int i = 0; i < 24; ++i) e = std::max(e, std::abs(au(n, i) - ad[n * 24 + i]));
    CHECK(e < 1e-8);
    CHECK(ls.gram(u, u) == doctest::Approx(x.dot(b.G * x)).epsilon(1e-12));
    const auto j = nlohmann::json::parse(rep.to_json());
    CHECK(j.at("trials") == 40);
    CHECK(j.at("a_bound_violations") == 0);
  }
}

TEST_CASE("macroscopic coercivity tracks the Witten gap for the zero kernel") {
  const Setup s(128, 9.0, InteractionKernel::zero(1));
  const LinearStructure ls(s.ss, s.kernel, 2, 1.0);
  const auto b = assemble_discrete_operators(ls);
  const double lm = macroscopic_coercivity_constant(b);
  const double gap = witten_gap(s.pb.v.value, s.grid).gap;
  MESSAGE("lambda_M = ", lm, ", sqrt(gap) = ", std::sqrt(gap));
  CHECK(lm == doctest::Approx(std::sqrt(gap)).epsilon(0.05));
}

TEST_CASE("norm homogeneity and fractional interpolation") {
  const Setup s(64, 9.0, InteractionKernel::synchrotron(0.1));
  const LinearStructure ls(s.ss, s.kernel, 6, 1.0);
  std::mt19937_64 rng(5);
  NormOptions opt;
  opt.hs_list = {0.25, 0.5};
  for (int t = 0; t < 10; ++t) {
    const auto u = testing::random_coeffs(6, 64, rng);
    const double c = -2.5;
    const auto a = compute_norms(ls, u, 0.0, opt), b2 = compute_norms(ls, Coeffs(c * u), 0.0, opt);
    CHECK(b2.l2 == doctest::Approx(std::abs(c) * a.l2).epsilon(1e-12));
    CHECK(b2.gradx == doctest::Approx(std::abs(c) * a.gradx).epsilon(1e-12));
    CHECK(b2.gradv == doctest::Approx(std::abs(c) * a.gradv).epsilon(1e-12));
    CHECK(b2.hsx.at(0.5) == doctest::Approx(std::abs(c) * a.hsx.at(0.5)).epsilon(1e-12));
    CHECK(b2.e0 == doctest::Approx(c * c * a.e0).epsilon(1e-10));
    const double h0 = ls.hs_norm(u, 0.0), h1 = ls.hs_norm(u, 1.0);
    for (double sx : {0.25, 0.5, 0.75}) CHECK(ls.hs_norm(u, sx) <= std::pow(h0, 1 - sx) * std::pow(h1, sx) * (1 + 1e-12));
    CHECK(h0 == doctest::Approx(std::sqrt(ls.l2_sq(u))).epsilon(1e-10));
  }
}

TEST_CASE("time weights") {
  CHECK(time_weight(3.0, 0.0, 0.25) == doctest::Approx(std::pow(0.25, 1.5)));
  CHECK(time_weight(1.0, 0.5, 4.0) == doctest::Approx(std::exp(2.0)));
  CHECK(time_weight(0.0, 0.0, 0.0) == 1.0);
}

TEST_CASE("rate fits recover synthetic rates") {
  std::vector<double> t, ye, yp;
  for (int i = 0; i <= 200; ++i) {
    t.push_back(1e-3 + 0.05 * i);
    ye.push_back(3.0 * std::exp(-2.0 * t.back()));
    yp.push_back(0.7 * std::pow(t.back(), -1.5));
  }
  const auto fe = fit_rates(t, ye, {0.5, 8.0}, FitKind::Exponential);
  CHECK(fe.lambda_hat == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(fe.r_squared == doctest::Approx(1.0).epsilon(1e-9));
  const auto fp = fit_rates(t, yp, {0.01, 10.0}, FitKind::Power);
  CHECK(fp.exponent_hat == doctest::Approx(-1.5).epsilon(1e-6));
  CHECK_THROWS_AS(fit_rates(t, ye, {100, 200}, FitKind::Exponential), DomainError);
  auto neg = ye;
  neg[40] = -1.0;
  CHECK_THROWS_AS(fit_rates(t, neg, {0.0, 10.0}, FitKind::Exponential), DomainError);
}

TEST_CASE("critical smoothness") {
  CHECK(critical_smoothness(3, 6.0) == 0.25);
  for (int d = 1; d <= 3; ++d) {
    CHECK(critical_smoothness(d, d >= 2 ? double(d) : 2.0) == doctest::Approx(d >= 2 ? 1.0 : 0.25));
    CHECK(critical_smoothness(d, 3.0 * d >= 2 ? 3.0 * d : 2.0) == doctest::Approx(0.0));
  }
  CHECK(critical_smoothness(2, 2.0) == 1.0);
  CHECK(critical_smoothness(3, 3.0) == 1.0);
  CHECK(critical_smoothness(3, INFINITY) == 0.0);
  CHECK_THROWS_AS(critical_smoothness(3, 1.0), DomainError);
}

TEST_CASE("diagnostic series CSV") {
  DiagnosticSeries s;
  s.append({{"t", 0.0}, {"mass", 1.0}, {"extra", 2.5}});
  s.append({{"t", 0.1}, {"mass", 1.0 - 1e-17}, {"e0", 0.125}});
  std::ostringstream os;
  s.write_csv(os);
  const std::string text = os.str();
  std::istringstream lines(text);
  std::string line;
  std::size_t commas = std::string::npos;
  while (std::getline(lines, line)) {
    const auto c = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    if (commas == std::string::npos) commas = c;
    CHECK(c == commas);
  }
  std::istringstream is(text);
  const auto r = DiagnosticSeries::read_csv(is);
  CHECK(r.columns == s.columns);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.values("mass")[1] == s.values("mass")[1]);
  CHECK(std::isnan(r.values("e0")[0]));
  CHECK(std::isnan(r.values("extra")[1]));
  CHECK(r.values("extra")[0] == 2.5);
}
