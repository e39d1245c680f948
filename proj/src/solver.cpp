#include "vfpk/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vfpk/diagnostics.hpp"
#include "vfpk/errors.hpp"
#include "vfpk/linear.hpp"

namespace vfpk {

std::string to_string(Limiter l) {
  switch (l) {
    case Limiter::None: return "none";
    case Limiter::MinMod: return "minmod";
    case Limiter::VanLeer: return "vanleer";
    case Limiter::MC: return "mc";
  }
  return "?";
}

Limiter limiter_from_string(const std::string& s) {
  if (s == "none") return Limiter::None;
  if (s == "minmod") return Limiter::MinMod;
  if (s == "vanleer") return Limiter::VanLeer;
  if (s == "mc") return Limiter::MC;
  throw DomainError("unknown limiter '" + s + "'");
}

KineticSolver::KineticSolver(const SpatialGrid& grid, int n_modes, const ConfinementPotential& potential,
                             const InteractionKernel& kernel, EvolveConfig cfg,
                             std::optional<SteadyState> steady)
    : grid_(grid), basis_(n_modes), cfg_(std::move(cfg)), steady_(std::move(steady)), kernel_(kernel) {
  if (grid_.dim() != 1) throw DomainError("the kinetic solver is one-dimensional in x");
  if (!(cfg_.nu > 0)) throw DomainError("nu must be positive");
  if (!(cfg_.dt > 0)) throw DomainError("dt must be positive");
  if (cfg_.output_stride < 1) throw DomainError("output stride must be at least 1");
  v_ = sample_potential(potential, grid_);
  conv_ = Convolver(tabulate_kernel(kernel, grid_));
  if (grid_.symmetric_about_origin()) split_ = even_odd_split(kernel, grid_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(basis_.velocity_matrix());
  char_vectors_ = es.eigenvectors();
  char_speeds_ = es.eigenvalues();
  if (steady_) {
    if (!steady_->rho_star.grid().same_as(grid_)) throw DomainError("steady state lives on a different grid");
    e_star_.resize(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) e_star_[i] = -steady_->v_star_grad[0][i];
  }
  if (cfg_.mode == EvolveMode::Linearized && !steady_)
    throw DomainError("linearized evolution needs a steady state");
  check_cfl(cfg_.dt);
  if (cfg_.mode == EvolveMode::Linearized) {
    // Replays the nonlinear substeps on F★ so the linearized step is their
    // exact derivative at F★ (the background moves inside a step).
    auto ladder = [](const Coeffs& c) {
      Coeffs g = Coeffs::Zero(c.rows(), c.cols());
      for (int n = 1; n < c.rows(); ++n) g.row(n) = std::sqrt(double(n)) * c.row(n - 1);
      return g;
    };
    PhaseSpaceState bg = steady_phase_state();
    step_transport(bg, 0.5 * cfg_.dt);
    Field rho(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) rho[i] = bg.coeffs(0, i);
    lin_e_ = nonlinear_field(rho);
    lin_g_[0] = ladder(bg.coeffs);
    step_force(bg, lin_e_, 0.5 * cfg_.dt);
    bg = fokker_planck_decay(bg, cfg_.nu, cfg_.dt);
    lin_g_[1] = ladder(bg.coeffs);
  }
}

double KineticSolver::dt_max() const {
  return cfg_.cfl_guard * grid_.spacing(0) / basis_.max_speed();
}

void KineticSolver::check_cfl(double dt) const {
  if (dt > dt_max() * (1 + 1e-12)) throw CflError(dt, dt_max());
}

namespace {

inline double minmod(double a, double b) {
  if (a * b <= 0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

inline double slope(Limiter lim, double dl, double dr) {
  switch (lim) {
    case Limiter::None: return 0.5 * (dl + dr);
    case Limiter::MinMod: return minmod(dl, dr);
    case Limiter::VanLeer: return dl * dr > 0 ? 2.0 * dl * dr / (dl + dr) : 0.0;
    case Limiter::MC: {
      if (dl * dr <= 0) return 0.0;
      const double c = 0.5 * (dl + dr);
      const double m = std::min({std::abs(c), 2 * std::abs(dl), 2 * std::abs(dr)});
      return c > 0 ? m : -m;
    }
  }
  return 0.0;
}

}  // namespace

// One MUSCL–Hancock update of w_t + a w_x = 0; dt = 0 yields the semi-discrete
// flux divergence scaled by -1 (returned in `out`).
void KineticSolver::transport_row(double a, const double* in, double* out, double dt) const {
  const int n = static_cast<int>(grid_.size());
  const double h = grid_.spacing(0);
  const bool periodic = cfg_.boundary == XBoundary::Periodic;
  // Two ghosts per side: zero on the inflow side, copies on the outflow side.
  std::vector<double> w(n + 4);
  for (int i = 0; i < n; ++i) w[i + 2] = in[i];
  if (periodic) {
    w[0] = in[n - 2];
    w[1] = in[n - 1];
    w[n + 2] = in[0];
    w[n + 3] = in[1];
  } else if (a >= 0) {
    w[0] = w[1] = 0.0;
    w[n + 2] = w[n + 3] = in[n - 1];
  } else {
    w[0] = w[1] = in[0];
    w[n + 2] = w[n + 3] = 0.0;
  }
  std::vector<double> d(n + 4, 0.0);
  for (int j = 1; j < n + 3; ++j) d[j] = slope(cfg_.limiter, w[j] - w[j - 1], w[j + 1] - w[j]);
  const double c = a * dt / h;
  // flux[j] sits at the interface between padded cells j and j+1.
  std::vector<double> flux(n + 3, 0.0);
  for (int j = 1; j < n + 2; ++j) {
    flux[j] = a >= 0 ? a * (w[j] + 0.5 * (1.0 - c) * d[j]) : a * (w[j + 1] - 0.5 * (1.0 + c) * d[j + 1]);
  }
  for (int i = 0; i < n; ++i) {
    const int j = i + 2;
    const double div = (flux[j] - flux[j - 1]) / h;
    out[i] = dt > 0 ? in[i] - dt * div : -div;
  }
}

void KineticSolver::step_transport(PhaseSpaceState& s, double dt) const {
  check_cfl(dt);
  const int nv = s.n_modes();
  if (nv != basis_.n_modes()) throw DomainError("state and solver mode counts differ");
  Coeffs W = char_vectors_.transpose() * s.coeffs;
  Coeffs out(W.rows(), W.cols());
  for (int k = 0; k < nv; ++k) transport_row(char_speeds_[k], W.row(k).data(), out.row(k).data(), dt);
  s.coeffs = char_vectors_ * out;
}

void KineticSolver::step_force(PhaseSpaceState& s, const Field& E, double dt, const Coeffs* increment) const {
  const int nv = s.n_modes();
  const int nx = s.n_x();
  for (double e : E)
    if (!std::isfinite(e)) throw NumericalError("force field is not finite");
  // Generator (G c)_n = E √n c_{n-1}; the series terminates after nv terms.
  Coeffs acc = s.coeffs;
  if (increment) acc += *increment;
  Coeffs term = acc;
  const double scale = std::max(1e-300, acc.cwiseAbs().maxCoeff());
  for (int k = 1; k < nv; ++k) {
    Coeffs next = Coeffs::Zero(nv, nx);
    for (int n = nv - 1; n >= 1; --n) {
      const double c = dt * std::sqrt(double(n)) / k;
      for (int i = 0; i < nx; ++i) next(n, i) = c * E[i] * term(n - 1, i);
    }
    term.swap(next);
    acc += term;
    if (k >= 4 && term.cwiseAbs().maxCoeff() < 1e-18 * scale) break;
  }
  s.coeffs = acc;
}

Field KineticSolver::force_field(const PhaseSpaceState& s) const {
  const std::size_t nx = grid_.size();
  if (cfg_.mode == EvolveMode::Linearized) return e_star_;
  Field rho(nx);
  for (std::size_t i = 0; i < nx; ++i) rho[i] = s.coeffs(0, i);
  return nonlinear_field(rho);
}

Field KineticSolver::nonlinear_field(const Field& rho) const {
  const std::size_t nx = grid_.size();
  Field E(nx);
  const Field dpsi = conv_.is_zero() ? Field(nx, 0.0) : conv_.gradient(rho)[0];
  for (std::size_t i = 0; i < nx; ++i) E[i] = -(v_.gradient[0][i] + dpsi[i]);
  return E;
}

Field KineticSolver::linear_coupling(const PhaseSpaceState& s) const {
  const std::size_t nx = grid_.size();
  Field b(nx, 0.0);
  if (conv_.is_zero()) return b;
  Field h0(nx);
  for (std::size_t i = 0; i < nx; ++i) h0[i] = s.coeffs(0, i);
  const Field dpsi = conv_.gradient(h0)[0];
  for (std::size_t i = 0; i < nx; ++i) b[i] = -steady_->rho_star[i] * dpsi[i];
  return b;
}

void KineticSolver::step(PhaseSpaceState& s) const {
  const double dt = cfg_.dt;
  const bool lin = cfg_.mode == EvolveMode::Linearized;
  step_transport(s, 0.5 * dt);
  const int nv = s.n_modes(), nx = s.n_x();
  Field E = lin ? lin_e_ : force_field(s);
  // Linearized: derivative of exp(τ E(F) G) F at the background, i.e.
  // exp(τ E_bg G)(h + τ δE G F_bg) with δE = -∂_x ψ_h.
  Field dE;
  if (lin) {
    dE = conv_.is_zero() ? Field(nx, 0.0) : Field();
    if (!conv_.is_zero()) {
      Field h0(nx);
      for (int i = 0; i < nx; ++i) h0[i] = s.coeffs(0, i);
      dE = conv_.gradient(h0)[0];
      for (auto& v : dE) v = -v;
    }
  }
  auto increment = [&](const Coeffs& g) {
    Coeffs inc = g;
    for (int i = 0; i < nx; ++i) inc.col(i) *= 0.5 * dt * dE[i];
    return inc;
  };
  if (lin) {
    const Coeffs inc = increment(lin_g_[0]);
    step_force(s, E, 0.5 * dt, &inc);
  } else {
    step_force(s, E, 0.5 * dt);
  }
  s = fokker_planck_decay(s, cfg_.nu, dt);
  if (lin && cfg_.source) {
    const Coeffs phi = cfg_.source(s.time + 0.5 * dt, s);
    for (int n = 1; n < nv && n - 1 < phi.rows(); ++n)
      for (int i = 0; i < nx; ++i)
        s.coeffs(n, i) += dt * steady_->rho_star[i] * std::sqrt(double(n)) * phi(n - 1, i);
  }
  if (lin) {
    const Coeffs inc = increment(lin_g_[1]);
    step_force(s, E, 0.5 * dt, &inc);
  } else {
    step_force(s, E, 0.5 * dt);
  }
  step_transport(s, 0.5 * dt);
  if (cfg_.filter_on) s = apply_filter(s);
  s.time += dt;
}

Coeffs KineticSolver::rhs(const PhaseSpaceState& s) const {
  const int nv = s.n_modes(), nx = s.n_x();
  const bool lin = cfg_.mode == EvolveMode::Linearized;
  Coeffs W = char_vectors_.transpose() * s.coeffs;
  Coeffs out(nv, nx);
  for (int k = 0; k < nv; ++k) transport_row(char_speeds_[k], W.row(k).data(), out.row(k).data(), 0.0);
  Coeffs r = char_vectors_ * out;
  const Field E = force_field(s);
  for (int n = 1; n < nv; ++n)
    for (int i = 0; i < nx; ++i) r(n, i) += E[i] * std::sqrt(double(n)) * s.coeffs(n - 1, i);
  if (lin) {
    const Field b = linear_coupling(s);
    for (int i = 0; i < nx; ++i) r(1, i) += b[i];
  }
  for (int n = 1; n < nv; ++n) r.row(n) -= cfg_.nu * n * s.coeffs.row(n);
  return r;
}

PhaseSpaceState KineticSolver::steady_phase_state() const {
  if (!steady_) throw DomainError("no steady state attached to the solver");
  PhaseSpaceState s(grid_, basis_.n_modes());
  for (std::size_t i = 0; i < grid_.size(); ++i) s.coeffs(0, i) = steady_->rho_star[i];
  return s;
}

EvolveResult evolve(const KineticSolver& solver, PhaseSpaceState initial, DiagnosticSeries& series,
                    const EvolveOptions& opt) {
  const auto& cfg = solver.config();
  const bool lin = cfg.mode == EvolveMode::Linearized;
  const int nv = solver.basis().n_modes();
  if (initial.n_modes() != nv || !initial.grid.same_as(solver.grid()))
    throw DomainError("initial state does not match the solver discretization");
  std::optional<LinearStructure> ls;
  if (solver.steady()) ls.emplace(*solver.steady(), solver.kernel(), nv, cfg.nu);
  std::optional<FreeEnergyEvaluator> fe;
  if (!lin && solver.grid().symmetric_about_origin())
    fe.emplace(solver.grid(), nv, solver.potential_samples().value, solver.split(), cfg.nu);
  NormOptions nopt;
  nopt.hs_list = opt.hs_list;
  nopt.e0_eps = opt.e0_eps;
  if (opt.e11) nopt.e11 = *opt.e11;
  nopt.with_functionals = opt.functionals;

  auto record = [&](const PhaseSpaceState& st) {
    std::map<std::string, double> e;
    e["t"] = st.time;
    e["mass"] = st.mass();
    if (fe) {
      const FreeEnergyParts p = fe->evaluate(st);
      e["free_energy"] = p.energy;
      e["dissipation"] = p.dissipation;
      e["odd_work"] = p.odd_work;
    }
    if (ls) {
      const Coeffs u = lin ? ls->u_from_h(st.coeffs) : ls->u_from_state(st);
      const NormRecord r = compute_norms(*ls, u, st.time, nopt);
      e["l2_fstar"] = r.l2;
      e["h1x_fstar"] = r.h1x;
      e["gradv_l2"] = r.gradv;
      e["gradx_l2"] = r.gradx;
      e["twisted"] = r.twisted;
      e["e0"] = r.e0;
      e["e11"] = r.e11;
      for (const auto& [s, v] : r.hsx) {
        std::ostringstream name;
        name << "hs_" << s;
        e[name.str()] = v;
      }
    }
    if (opt.extra_columns)
      for (const auto& [k, v] : opt.extra_columns(st)) e[k] = v;
    series.append(e);
  };

  EvolveResult res;
  PhaseSpaceState s = std::move(initial);
  PhaseSpaceState last_good = s;
  record(s);
  const long n_steps = std::lround(cfg.t_end / cfg.dt);
  for (long k = 1; k <= n_steps; ++k) {
    solver.step(s);
    res.steps = k;
    if (!s.finite()) {
      res.aborted = true;
      res.message = "non-finite state at step " + std::to_string(k);
      s = last_good;
      break;
    }
    last_good = s;
    if (opt.observer) opt.observer(s, k);
    if (k % cfg.output_stride == 0 || k == n_steps) record(s);
  }
  res.final_state = s;
  res.last_good = last_good;

  if (opt.weighted_columns && ls) {
    try {
      res.lambda_hat = fit_rates(series, "l2_fstar", opt.fit_window, FitKind::Exponential).lambda_hat;
    } catch (const DomainError&) {
      res.lambda_hat = 0.0;
    }
    const auto t = series.values("t");
    const auto l2 = series.values("l2_fstar");
    const auto gv = series.values("gradv_l2");
    const auto gx = series.values("gradx_l2");
    for (std::size_t r = 0; r < t.size(); ++r) {
      const bool pos = t[r] > 0;
      series.set(r, "w0_l2", time_weight(0, res.lambda_hat, t[r]) * l2[r]);
      series.set(r, "w1_gradv", pos ? time_weight(1, res.lambda_hat, t[r]) * gv[r] : NAN);
      series.set(r, "w3_gradx", pos ? time_weight(3, res.lambda_hat, t[r]) * gx[r] : NAN);
    }
  }
  return res;
}

SteadyKineticReport verify_steady_kinetic(const SteadyState& ss, const KineticSolver& solver) {
  if (solver.config().mode != EvolveMode::Nonlinear)
    throw DomainError("steady kinetic residual is measured with a nonlinear solver");
  if (!ss.rho_star.grid().same_as(solver.grid())) throw DomainError("steady state grid differs from solver grid");
  PhaseSpaceState F(solver.grid(), solver.basis().n_modes());
  for (std::size_t i = 0; i < solver.grid().size(); ++i) F.coeffs(0, i) = ss.rho_star[i];
  const Coeffs r = solver.rhs(F);
  const double h = solver.grid().spacing(0);
  SteadyKineticReport rep;
  rep.residual_l2 = std::sqrt(h * r.squaredNorm());
  rep.relative = rep.residual_l2 / std::sqrt(h * F.coeffs.squaredNorm());
  return rep;
}

}  // namespace vfpk
