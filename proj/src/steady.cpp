#include "vfpk/steady.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "vfpk/errors.hpp"

namespace vfpk {

SteadyProblem::SteadyProblem(const ConfinementPotential& p, const InteractionKernel& k,
                             const SpatialGrid& g)
    : grid(g), potential(normalize(p, g)), kernel(k) {
  v = sample_potential(potential, grid);
  e_minus_v.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) e_minus_v[i] = std::exp(-v.value[i]);
  const KernelTable table = tabulate_kernel(kernel, grid);
  conv = Convolver(table);
  if (grid.symmetric_about_origin()) conv_even = Convolver(even_odd_split(kernel, grid).even);
}

std::vector<double> SteadyState::contraction_factors() const {
  std::vector<double> out;
  for (std::size_t i = 1; i < residuals.size(); ++i)
    out.push_back(residuals[i - 1] > 0 ? residuals[i] / residuals[i - 1] : 0.0);
  return out;
}

bool SteadyState::residuals_monotone() const {
  for (std::size_t i = 1; i < residuals.size(); ++i)
    if (residuals[i] > residuals[i - 1]) return false;
  return true;
}

DensityField s_map(const SteadyProblem& pb, const DensityField& rho) {
  for (double r : rho.values())
    if (!std::isfinite(r) || r < 0) throw DomainError("s_map needs a finite nonnegative density");
  const Field psi = pb.conv.apply(rho.values());
  Field s(pb.grid.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double e = -pb.v.value[i] - psi[i];
    if (e > 700.0) throw NumericalError("exponent -V-Kρ exceeds 700 (overflow guard)");
    s[i] = std::exp(e);
  }
  return DensityField(pb.grid, std::move(s));
}

DensityField t_map(const SteadyProblem& pb, const DensityField& rho) {
  DensityField s = s_map(pb, rho);
  Field t = s.values();
  const double m = s.mass();
  for (auto& x : t) x /= m;
  return DensityField(pb.grid, std::move(t));
}

double estimate_zeta(const SteadyProblem& pb) {
  if (pb.conv.is_zero()) return 0.0;
  const Field a = pb.conv.apply(pb.e_minus_v, true);
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

double macro_free_energy(const DensityField& rho, const Field& V, const Convolver& even) {
  for (double r : rho.values())
    if (!(r > 0)) throw DomainError("free energy needs a positive density at every node");
  const Field psi = even.is_zero() ? Field(rho.size(), 0.0) : even.apply(rho.values());
  double s = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i)
    s += rho[i] * (V[i] + 0.5 * psi[i] + std::log(rho[i]));
  return s * rho.grid().cell_volume();
}

double macro_free_energy(const DensityField& rho, const Field& V, const KernelSplit& split) {
  return macro_free_energy(rho, V, Convolver(split.even));
}

SteadyState steady_state_from_density(const SteadyProblem& pb, const DensityField& rho) {
  SteadyState ss;
  ss.rho_star = rho;
  ss.v_bare = pb.v.value;
  ss.zeta = estimate_zeta(pb);
  const Field psi = pb.conv.apply(rho.values());
  const auto dpsi = pb.conv.gradient(rho.values());
  Field s(rho.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::exp(-pb.v.value[i] - psi[i]);
  const double logm = std::log(pb.grid.integrate(s));
  ss.v_star.resize(rho.size());
  for (std::size_t i = 0; i < s.size(); ++i) ss.v_star[i] = pb.v.value[i] + psi[i] + logm;
  for (int a = 0; a < pb.grid.dim(); ++a) {
    Field g(rho.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = pb.v.gradient[a][i] + dpsi[a][i];
    ss.v_star_grad.push_back(std::move(g));
  }
  return ss;
}

SteadyState solve_fixed_point(const SteadyProblem& pb, const FixedPointOptions& opt) {
  if (!opt.allow_nonpositive_kernel && !pb.conv.is_zero()) {
    const auto pos = verify_positivity(pb.kernel, pb.grid, 4);
    if (!pos.passed)
      throw DomainError("kernel fails the positivity check; enable the nonpositive-kernel override");
  }
  const double zeta = estimate_zeta(pb);
  double omega = opt.omega;
  if (omega == 0.0) omega = 2.0 * zeta * std::exp(zeta) < 0.9 ? 1.0 : 0.5;
  if (!(omega > 0.0 && omega <= 1.0)) throw DomainError("damping must lie in (0, 1]");

  Field rho = opt.initial ? *opt.initial : pb.e_minus_v;
  if (rho.size() != pb.grid.size()) throw DomainError("initial density does not match grid");
  std::vector<double> residuals, fe;
  Field best = rho;
  double best_res = INFINITY;
  bool converged = false;
  int it = 0;
  const bool track = opt.track_free_energy && pb.grid.symmetric_about_origin();
  if (track) fe.push_back(macro_free_energy(DensityField(pb.grid, rho), pb.v.value, pb.conv_even));
  for (it = 1; it <= opt.max_iter; ++it) {
    const DensityField t = t_map(pb, DensityField(pb.grid, rho));
    Field next(rho.size());
    double res = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      next[i] = (1.0 - omega) * rho[i] + omega * t[i];
      res += std::abs(next[i] - rho[i]);
    }
    res *= pb.grid.cell_volume();
    residuals.push_back(res);
    rho = std::move(next);
    if (track) fe.push_back(macro_free_energy(DensityField(pb.grid, rho), pb.v.value, pb.conv_even));
    if (res < best_res) {
      best_res = res;
      best = rho;
    }
    if (res < opt.tol) {
      converged = true;
      break;
    }
    if (res > 10.0 * residuals.front() && res > 1e-8)
      throw ConvergenceError("fixed-point iteration diverged (residual grew tenfold)");
  }
  SteadyState ss = steady_state_from_density(pb, DensityField(pb.grid, converged ? rho : best));
  ss.residuals = std::move(residuals);
  ss.free_energy_history = std::move(fe);
  ss.converged = converged;
  ss.status = converged ? FixedPointStatus::Converged : FixedPointStatus::MaxIterations;
  ss.omega = omega;
  ss.iterations = std::min(it, opt.max_iter);
  return ss;
}

UniquenessReport uniqueness_probe(const SteadyProblem& pb, int attempts, double tol,
                                  unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  UniquenessReport rep;
  rep.attempts = attempts;
  std::vector<Field> found;
  for (int a = 0; a < attempts; ++a) {
    Field init(pb.grid.size());
    // Random admissible start: e^{-V} times a positive random profile, unit mass.
    for (std::size_t i = 0; i < init.size(); ++i) init[i] = pb.e_minus_v[i] * (0.2 + u(rng));
    const double m = pb.grid.integrate(init);
    for (auto& x : init) x /= m;
    FixedPointOptions opt;
    opt.tol = tol;
    opt.initial = init;
    opt.track_free_energy = false;
    opt.max_iter = 2000;
    opt.allow_nonpositive_kernel = true;
    try {
      const SteadyState ss = solve_fixed_point(pb, opt);
      if (ss.converged) {
        ++rep.converged;
        found.push_back(ss.rho_star.values());
      }
    } catch (const ConvergenceError&) {
    }
  }
  for (std::size_t i = 0; i < found.size(); ++i)
    for (std::size_t j = i + 1; j < found.size(); ++j) {
      double d = 0.0;
      for (std::size_t k = 0; k < found[i].size(); ++k) d += std::abs(found[i][k] - found[j][k]);
      rep.max_pairwise_l1 = std::max(rep.max_pairwise_l1, d * pb.grid.cell_volume());
    }
  rep.coincide = rep.converged == attempts && rep.max_pairwise_l1 <= 10.0 * tol;
  return rep;
}

}  // namespace vfpk
