#include "vfpk/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "vfpk/errors.hpp"
#include "vfpk/steady.hpp"

namespace vfpk {

namespace {

// Visit every nearest-neighbour edge (i, j) along each axis.
template <class F>
void for_each_edge(const SpatialGrid& g, F&& f) {
  for (int a = 0; a < g.dim(); ++a) {
    const std::size_t st = g.stride(a);
    const double inv_h2 = 1.0 / (g.spacing(a) * g.spacing(a));
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.unravel(i)[a] == g.nodes(a) - 1) continue;
      f(i, i + st, inv_h2);
    }
  }
}

Field ground_state(const Field& V) {
  const double vmin = *std::min_element(V.begin(), V.end());
  Field g(V.size());
  double n2 = 0.0;
  for (std::size_t i = 0; i < V.size(); ++i) {
    g[i] = std::exp(-0.5 * (V[i] - vmin));
    n2 += g[i] * g[i];
  }
  for (auto& x : g) x /= std::sqrt(n2);
  return g;
}

double l2(const Field& a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

}  // namespace

Field apply_witten(const Field& V, const SpatialGrid& grid, const Field& u) {
  Field out(u.size(), 0.0);
  for_each_edge(grid, [&](std::size_t i, std::size_t j, double c) {
    out[i] += c * (std::exp(-0.5 * (V[j] - V[i])) * u[i] - u[j]);
    out[j] += c * (std::exp(-0.5 * (V[i] - V[j])) * u[j] - u[i]);
  });
  return out;
}

double weighted_dirichlet(const Field& V, const SpatialGrid& grid, const Field& u) {
  double s = 0.0;
  for_each_edge(grid, [&](std::size_t i, std::size_t j, double c) {
    const double du = u[i] - u[j];
    s += std::exp(-0.5 * (V[i] + V[j])) * du * du * c;
  });
  return s * grid.cell_volume();
}

namespace {

GapReport gap_1d(const Field& V, const SpatialGrid& grid) {
  const int n = grid.nodes(0);
  const double c = 1.0 / (grid.spacing(0) * grid.spacing(0));
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), off = Eigen::VectorXd::Constant(n - 1, -c);
  for (int i = 0; i + 1 < n; ++i) {
    diag[i] += c * std::exp(-0.5 * (V[i + 1] - V[i]));
    diag[i + 1] += c * std::exp(-0.5 * (V[i] - V[i + 1]));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("tridiagonal eigensolver did not converge");
  GapReport r;
  r.gap = es.eigenvalues()[1];
  return r;
}

GapReport gap_lanczos(const Field& V, const SpatialGrid& grid, const Field& g0,
                      const LanczosOptions& opt) {
  const std::size_t n = V.size();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  auto deflate = [&](Field& x) {
    double p = 0.0;
    for (std::size_t i = 0; i < n; ++i) p += x[i] * g0[i];
    for (std::size_t i = 0; i < n; ++i) x[i] -= p * g0[i];
  };
  Field q(n), q_prev(n, 0.0);
  for (auto& x : q) x = nd(rng);
  deflate(q);
  double nq = l2(q);
  for (auto& x : q) x /= nq;
  std::vector<double> alpha, beta;
  double prev = INFINITY;
  double beta_prev = 0.0;
  for (int k = 0; k < opt.max_iter; ++k) {
    Field w = apply_witten(V, grid, q);
    deflate(w);
    double a = 0.0;
    for (std::size_t i = 0; i < n; ++i) a += w[i] * q[i];
    for (std::size_t i = 0; i < n; ++i) w[i] -= a * q[i] + beta_prev * q_prev[i];
    deflate(w);
    const double b = l2(w);
    alpha.push_back(a);
    if ((k + 1) % 10 == 0 || b < 1e-14 || k + 1 == opt.max_iter) {
      const int m = static_cast<int>(alpha.size());
      Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
      Eigen::VectorXd e = m > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1))
                                : Eigen::VectorXd();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
      const double theta = es.eigenvalues()[0];
      const double resid = b * std::abs(es.eigenvectors()(m - 1, 0));
      if (b < 1e-14 || (std::abs(theta - prev) < opt.tol * theta && resid < 1e-6 * (1.0 + theta))) {
        GapReport r;
        r.gap = theta;
        return r;
      }
      prev = theta;
    }
    beta.push_back(b);
    beta_prev = b;
    q_prev = q;
    for (std::size_t i = 0; i < n; ++i) q[i] = w[i] / b;
  }
  throw NumericalError("Lanczos eigensolver did not converge");
}

}  // namespace

GapReport witten_gap(const Field& V, const SpatialGrid& grid, const LanczosOptions& opt) {
  if (V.size() != grid.size()) throw DomainError("potential samples do not match grid");
  const Field g0 = ground_state(V);
  GapReport r = grid.dim() == 1 ? gap_1d(V, grid) : gap_lanczos(V, grid, g0, opt);
  if (!(r.gap > 0)) throw NumericalError("Witten operator has no positive gap");
  r.poincare_constant = 1.0 / r.gap;
  const Field hg = apply_witten(V, grid, g0);
  r.ground_state_defect = l2(hg);
  r.measure = GapMeasure::BarePotential;
  return r;
}

double weighted_poincare_constant(const Field& V, const Field& gfield, const SpatialGrid& grid) {
  if (grid.dim() != 1) throw DomainError("weighted Poincaré constant is computed for d = 1 only");
  const int n = grid.nodes(0);
  const double c = 1.0 / (grid.spacing(0) * grid.spacing(0));
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), off = Eigen::VectorXd::Constant(n - 1, -c);
  for (int i = 0; i + 1 < n; ++i) {
    diag[i] += c * std::exp(-0.5 * (V[i + 1] - V[i]));
    diag[i + 1] += c * std::exp(-0.5 * (V[i] - V[i + 1]));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NumericalError("tridiagonal eigensolver did not converge");
  // Drop the null vector; whiten the Dirichlet form on its complement.
  const Eigen::MatrixXd Q = es.eigenvectors().rightCols(n - 1);
  const Eigen::VectorXd lam = es.eigenvalues().tail(n - 1);
  Eigen::VectorXd g2(n);
  for (int i = 0; i < n; ++i) g2[i] = gfield[i] * gfield[i];
  Eigen::MatrixXd M = Q.transpose() * g2.asDiagonal() * Q;
  const Eigen::VectorXd s = lam.cwiseSqrt().cwiseInverse();
  M = s.asDiagonal() * M * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> top(M, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, top.eigenvalues().maxCoeff()));
}

GapReport steady_measure_gap(const SteadyState& ss, const LanczosOptions& opt) {
  const SpatialGrid& grid = ss.rho_star.grid();
  GapReport bare = witten_gap(ss.v_bare, grid, opt);
  GapReport r = witten_gap(ss.v_star, grid, opt);
  r.measure = GapMeasure::SteadyState;
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = ss.v_star[i] - ss.v_bare[i];
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  r.oscillation = hi - lo;
  r.bare_gap = bare.gap;
  r.holley_stroock_lower = bare.gap * std::exp(-r.oscillation);
  r.holley_stroock_upper = bare.gap * std::exp(r.oscillation);
  r.holley_stroock_poincare = bare.poincare_constant * std::exp(r.oscillation);
  if (grid.dim() == 1 && !ss.v_star_grad.empty())
    r.c_star = weighted_poincare_constant(ss.v_star, ss.v_star_grad[0], grid);
  return r;
}

}  // namespace vfpk
