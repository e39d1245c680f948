#include "vfpk/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "vfpk/diagnostics.hpp"
#include "vfpk/errors.hpp"
#include "vfpk/linear.hpp"
#include "vfpk/snapshot.hpp"
#include "vfpk/spectral.hpp"

namespace fs = std::filesystem;

namespace vfpk {
namespace {

std::string num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

fs::path prepare_dir(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

Field read_column_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("potential.table", "cannot open " + path);
  Field out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find_last_of(',');
    const std::string cell = comma == std::string::npos ? line : line.substr(comma + 1);
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str()) continue;  // header
    out.push_back(v);
  }
  return out;
}

void say(const RunOptions& opt, const std::string& msg) {
  if (!opt.quiet) std::cout << msg << "\n";
}

void write_manifest_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
  os << "\n";
}

struct PointOutcome {
  std::string status = "crashed";
  bool converged = false;
  int iterations = 0;
  double lambda_hat = NAN;
  double gap = NAN;
  int code = kExitFailure;
  std::string message;
};

}  // namespace

SpatialGrid make_grid(const RunConfig& cfg) {
  return SpatialGrid::uniform(cfg.grid.dim, cfg.grid.n_x, cfg.grid.half_width);
}

ConfinementPotential make_potential(const RunConfig& cfg, const SpatialGrid& grid) {
  const int d = cfg.grid.dim;
  switch (potential_family_from_string(cfg.potential.family)) {
    case PotentialFamily::Quadratic:
      return ConfinementPotential::quadratic(d);
    case PotentialFamily::PowerGrowth:
      return ConfinementPotential::power_growth(cfg.potential.alpha, d);
    case PotentialFamily::LogPower:
      return ConfinementPotential::log_power(cfg.potential.alpha, d);
    case PotentialFamily::Tabulated: {
      if (cfg.potential.table.empty()) throw ConfigError("potential.table", "Tabulated needs a table");
      Field samples = read_column_csv(cfg.potential.table);
      if (samples.size() != grid.size())
        throw ConfigError("potential.table", "expected " + std::to_string(grid.size()) + " samples");
      return ConfinementPotential::tabulated(grid, std::move(samples));
    }
  }
  throw ConfigError("potential.family", "unhandled family");
}

InteractionKernel make_kernel(const RunConfig& cfg) {
  const int d = cfg.grid.dim;
  const double I = cfg.kernel.strength;
  try {
    switch (kernel_family_from_string(cfg.kernel.family)) {
      case KernelFamily::Zero:
        return InteractionKernel::zero(d);
      case KernelFamily::Coulomb:
        return InteractionKernel::coulomb(I, d);
      case KernelFamily::Newton:
        return InteractionKernel::newton(I, d);
      case KernelFamily::Riesz:
        return InteractionKernel::riesz(I, cfg.kernel.alpha, d);
      case KernelFamily::Synchrotron:
        if (d != 1) throw DomainError("Synchrotron kernel is one-dimensional");
        return InteractionKernel::synchrotron(I);
      case KernelFamily::LipschitzTable:
        if (cfg.kernel.table.empty()) throw ConfigError("kernel.table", "LipschitzTable needs a table");
        return read_kernel_table(cfg.kernel.table, d, I);
    }
  } catch (const DomainError& e) {
    throw ConfigError("kernel", e.what());
  } catch (const IoError& e) {
    throw ConfigError("kernel.table", e.what());
  }
  throw ConfigError("kernel.family", "unhandled family");
}

EvolveConfig make_evolve_config(const RunConfig& cfg, EvolveMode mode) {
  EvolveConfig e;
  e.nu = cfg.velocity.nu;
  e.dt = cfg.evolve.dt;
  e.t_end = cfg.evolve.t_end;
  e.cfl_guard = cfg.evolve.cfl_guard;
  e.filter_on = cfg.evolve.filter;
  e.mode = mode;
  e.output_stride = cfg.evolve.output_stride;
  e.limiter = limiter_from_string(cfg.evolve.limiter);
  e.boundary = cfg.evolve.boundary == "Periodic" ? XBoundary::Periodic : XBoundary::Outflow;
  return e;
}

FixedPointOptions make_fixed_point_options(const RunConfig& cfg) {
  FixedPointOptions o;
  o.tol = cfg.steady.tol;
  o.max_iter = cfg.steady.max_iter;
  o.omega = cfg.steady.omega;
  o.allow_nonpositive_kernel = cfg.steady.allow_nonpositive;
  return o;
}

SteadyState obtain_steady_state(const RunConfig& cfg, const SteadyProblem& pb) {
  if (!cfg.steady.load.empty()) {
    const DensitySnapshot snap = read_density_snapshot(cfg.steady.load);
    if (!snap.grid.same_as(pb.grid)) throw ConfigError("steady.load", "snapshot grid differs from run grid");
    SteadyState ss = steady_state_from_density(pb, DensityField(pb.grid, snap.rho));
    ss.converged = true;
    ss.status = FixedPointStatus::Converged;
    return ss;
  }
  return solve_fixed_point(pb, make_fixed_point_options(cfg));
}

PhaseSpaceState make_initial_state(const RunConfig& cfg, const SteadyState& ss, EvolveMode mode) {
  const SpatialGrid& g = ss.rho_star.grid();
  const int nv = cfg.velocity.n_v;
  const std::size_t nx = g.size();
  PhaseSpaceState s(g, nv);
  const bool lin = mode == EvolveMode::Linearized;
  const auto& p = cfg.perturb;

  if (p.mode == "shifted_gaussian") {
    // F = ρ(x) M(v - b) with ρ a normalized Gaussian of the given center/width.
    const auto c = shifted_maxwellian_coeffs(p.velocity_shift, nv);
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = g.coord(0, static_cast<int>(i));
      const double rho = std::exp(-0.5 * std::pow((x - p.center) / p.width, 2)) /
                         (p.width * std::sqrt(2.0 * M_PI));
      for (int n = 0; n < nv; ++n) s.coeffs(n, i) = rho * c[n];
      if (lin) s.coeffs(0, i) -= ss.rho_star[i];
    }
    return s;
  }

  Field delta(nx, 0.0);  // mass-free density perturbation, in units of ρ★
  if (p.mode == "bump") {
    for (std::size_t i = 0; i < nx; ++i)
      delta[i] = std::exp(-std::pow((g.coord(0, static_cast<int>(i)) - p.center) / p.width, 2));
  } else if (p.mode == "rough") {
    std::mt19937_64 rng(static_cast<unsigned long long>(cfg.seed));
    std::normal_distribution<double> normal;
    for (auto& v : delta) v = normal(rng);
  }
  if (p.mode != "none") {
    double mean = 0.0;
    for (std::size_t i = 0; i < nx; ++i) mean += delta[i] * ss.rho_star[i];
    mean /= ss.rho_star.mass() / g.cell_volume();
    for (auto& v : delta) v = p.amplitude * (v - mean);
  }
  for (std::size_t i = 0; i < nx; ++i) {
    const double pert = delta[i] * ss.rho_star[i];
    s.coeffs(0, i) = lin ? pert : ss.rho_star[i] + pert;
  }
  return s;
}

std::map<std::string, double> phase_moments(const PhaseSpaceState& s) {
  const double h = s.grid.cell_volume();
  double m0 = 0, mx = 0, mv = 0, mxx = 0, mxv = 0, mvv = 0;
  for (int i = 0; i < s.n_x(); ++i) {
    const double x = s.grid.coord(0, i);
    const double c0 = s.coeffs(0, i);
    const double c1 = s.n_modes() > 1 ? s.coeffs(1, i) : 0.0;
    const double c2 = s.n_modes() > 2 ? s.coeffs(2, i) : 0.0;
    m0 += c0;
    mx += x * c0;
    mv += c1;
    mxx += x * x * c0;
    mxv += x * c1;
    mvv += c0 + std::sqrt(2.0) * c2;
  }
  return {{"moment_x", h * mx},   {"moment_v", h * mv},   {"moment_xx", h * mxx},
          {"moment_xv", h * mxv}, {"moment_vv", h * mvv}, {"moment_0", h * m0}};
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const CflError*>(&e)) return kExitCfl;
  if (dynamic_cast<const ConvergenceError*>(&e)) return kExitNoConvergence;
  return kExitFailure;
}

int threads_from_env() {
  if (const char* env = std::getenv("VFPK_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int run_steady(const RunConfig& cfg, const RunOptions& opt) {
  const SpatialGrid g = make_grid(cfg);
  const SteadyProblem pb(make_potential(cfg, g), make_kernel(cfg), g);
  const SteadyState ss = obtain_steady_state(cfg, pb);
  const fs::path dir = prepare_dir(cfg);
  write_density_snapshot((dir / "steady.rho").string(), {g, ss.rho_star.values(), ss.v_star});
  std::ofstream csv(dir / "convergence.csv");
  csv << "iteration,residual,contraction_factor,zeta,free_energy\n";
  const auto factors = ss.contraction_factors();
  for (std::size_t k = 0; k < ss.residuals.size(); ++k) {
    csv << k + 1 << "," << num(ss.residuals[k]) << "," << (k ? num(factors[k - 1]) : "") << ","
        << num(ss.zeta) << "," << (k < ss.free_energy_history.size() ? num(ss.free_energy_history[k]) : "")
        << "\n";
  }
  say(opt, "steady: iterations=" + std::to_string(ss.iterations) + " zeta=" + num(ss.zeta) +
               (ss.converged ? " converged" : " NOT converged"));
  return ss.converged ? kExitOk : kExitNoConvergence;
}

namespace {

int evolve_common(const RunConfig& cfg, const RunOptions& opt, EvolveMode mode,
                  std::map<std::string, double>* summary = nullptr) {
  const SpatialGrid g = make_grid(cfg);
  if (g.dim() != 1) throw ConfigError("grid.dim", "kinetic evolution is one-dimensional");
  const auto potential = make_potential(cfg, g);
  const auto kernel = make_kernel(cfg);
  const SteadyProblem pb(potential, kernel, g);
  const SteadyState ss = obtain_steady_state(cfg, pb);
  if (!ss.converged) {
    say(opt, "steady state did not converge");
    return kExitNoConvergence;
  }
  EvolveConfig ec = make_evolve_config(cfg, mode);
  if (mode == EvolveMode::Linearized && cfg.experiment.source == "manufactured") {
    const double amp = cfg.experiment.source_amplitude;
    const int nv = cfg.velocity.n_v;
    ec.source = [amp, nv, g](double t, const PhaseSpaceState&) {
      Coeffs phi = Coeffs::Zero(nv, static_cast<Eigen::Index>(g.size()));
      if (nv > 1)
        for (int i = 0; i < static_cast<int>(g.size()); ++i) {
          const double x = g.coord(0, i);
          phi(1, i) = amp * std::sin(t) * std::exp(-x * x);
        }
      return phi;
    };
  }
  const KineticSolver solver(g, cfg.velocity.n_v, potential, kernel, ec, ss);
  PhaseSpaceState init = make_initial_state(cfg, ss, mode);

  EvolveOptions eo;
  eo.hs_list = cfg.experiment.hs;
  eo.weighted_columns = cfg.experiment.weighted;
  eo.fit_window = {cfg.experiment.fit_from, cfg.experiment.fit_to > cfg.experiment.fit_from
                                                ? cfg.experiment.fit_to
                                                : cfg.evolve.t_end};
  eo.e0_eps = cfg.experiment.e0_eps;
  eo.functionals = cfg.experiment.functionals;
  if (mode == EvolveMode::Nonlinear) eo.extra_columns = phase_moments;

  DiagnosticSeries series;
  const EvolveResult res = evolve(solver, std::move(init), series, eo);
  // Rough data has no x-derivative at t = 0.
  if (cfg.perturb.mode == "rough" && !series.rows.empty())
    for (const char* c : {"h1x_fstar", "gradx_l2"})
      if (series.column(c) >= 0) series.set(0, c, NAN);
  const fs::path dir = prepare_dir(cfg);
  series.write_csv((dir / "series.csv").string());
  write_state_snapshot((dir / "final.pss").string(), res.last_good, cfg.velocity.nu);
  write_density_snapshot((dir / "steady.rho").string(), {g, ss.rho_star.values(), ss.v_star});

  double lambda = res.lambda_hat;
  if (!std::isfinite(lambda) && series.column("l2_fstar") >= 0) {
    try {
      lambda = fit_rates(series, "l2_fstar", eo.fit_window, FitKind::Exponential).lambda_hat;
    } catch (const Error&) {
    }
  }
  if (summary) {
    (*summary)["lambda_hat"] = lambda;
    (*summary)["iterations"] = ss.iterations;
    (*summary)["converged"] = ss.converged ? 1.0 : 0.0;
  }
  say(opt, "evolve: steps=" + std::to_string(res.steps) + " lambda_hat=" + num(lambda) +
               (res.aborted ? " ABORTED: " + res.message : ""));
  return res.aborted ? kExitNoConvergence : kExitOk;
}

}  // namespace

int run_evolve(const RunConfig& cfg, const RunOptions& opt) {
  return evolve_common(cfg, opt, EvolveMode::Nonlinear);
}

int run_linear(const RunConfig& cfg, const RunOptions& opt) {
  return evolve_common(cfg, opt, EvolveMode::Linearized);
}

int run_diagnose(const RunConfig& cfg, const RunOptions& opt) {
  const SpatialGrid g = make_grid(cfg);
  if (g.dim() != 1) throw ConfigError("grid.dim", "operator assembly is one-dimensional");
  const auto kernel = make_kernel(cfg);
  const SteadyProblem pb(make_potential(cfg, g), kernel, g);
  const SteadyState ss = obtain_steady_state(cfg, pb);
  const LinearStructure ls(ss, kernel, cfg.velocity.n_v, cfg.velocity.nu);
  const auto bundle = assemble_discrete_operators(ls);
  const auto rep = verify_operator_identities(bundle, cfg.velocity.nu, cfg.experiment.trials,
                                              static_cast<unsigned long long>(cfg.seed));
  const fs::path dir = prepare_dir(cfg);
  std::ofstream(dir / "operators.json") << rep.to_json() << "\n";
  say(opt, rep.to_json());
  return kExitOk;
}

int run_poincare(const RunConfig& cfg, const RunOptions& opt) {
  const SpatialGrid g = make_grid(cfg);
  const auto potential = make_potential(cfg, g);
  const SteadyProblem pb(potential, make_kernel(cfg), g);
  const GapReport bare = witten_gap(pb.v.value, g);
  const fs::path dir = prepare_dir(cfg);
  std::ofstream csv(dir / "poincare.csv");
  csv << "measure,gap,poincare_constant,ground_state_defect,oscillation,hs_lower,hs_upper,c_star\n";
  csv << "bare," << num(bare.gap) << "," << num(bare.poincare_constant) << ","
      << num(bare.ground_state_defect) << ",,,,\n";
  const SteadyState ss = obtain_steady_state(cfg, pb);
  const GapReport st = steady_measure_gap(ss);
  csv << "steady," << num(st.gap) << "," << num(st.poincare_constant) << "," << num(st.ground_state_defect)
      << "," << num(st.oscillation) << "," << num(st.holley_stroock_lower) << ","
      << num(st.holley_stroock_upper) << "," << num(st.c_star) << "\n";
  say(opt, "poincare: bare gap=" + num(bare.gap) + " steady gap=" + num(st.gap));
  return ss.converged ? kExitOk : kExitNoConvergence;
}

int run_sweep(const RunConfig& cfg, const RunOptions& opt) {
  std::vector<std::string> warnings;
  const auto points = sweep_points(cfg, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  const fs::path dir = prepare_dir(cfg);

  // Resolve every point's config up front so config errors surface as exit 2.
  std::vector<RunConfig> cfgs;
  for (std::size_t p = 0; p < points.size(); ++p) {
    RunConfig c = cfg;
    c.sweep.clear();
    for (const auto& [key, value] : points[p]) set_config_value(c, key, value);
    validate_config(c);
    char name[32];
    std::snprintf(name, sizeof name, "point_%04zu", p);
    c.output_dir = (dir / name).string();
    cfgs.push_back(std::move(c));
  }

  std::vector<PointOutcome> out(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    RunOptions quiet = opt;
    quiet.quiet = true;
    for (std::size_t p = next++; p < cfgs.size(); p = next++) {
      PointOutcome& o = out[p];
      try {
        prepare_dir(cfgs[p]);
        std::ofstream(fs::path(cfgs[p].output_dir) / "config.ini") << serialize_config(cfgs[p]);
        std::map<std::string, double> summary;
        o.code = evolve_common(cfgs[p], quiet, EvolveMode::Linearized, &summary);
        o.converged = summary.count("converged") && summary["converged"] > 0;
        o.iterations = summary.count("iterations") ? static_cast<int>(summary["iterations"]) : 0;
        o.lambda_hat = summary.count("lambda_hat") ? summary["lambda_hat"] : NAN;
        if (o.converged) {
          const SpatialGrid g = make_grid(cfgs[p]);
          const SteadyProblem pb(make_potential(cfgs[p], g), make_kernel(cfgs[p]), g);
          o.gap = steady_measure_gap(obtain_steady_state(cfgs[p], pb)).gap;
        }
        o.status = o.code == kExitOk ? "ok" : (o.converged ? "aborted" : "not_converged");
      } catch (const std::exception& e) {
        o.status = "crashed";
        o.code = exit_code_for(e);
        o.message = e.what();
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(opt.threads, static_cast<int>(cfgs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ofstream csv(dir / "manifest.csv");
  std::vector<std::string> header{"point"};
  if (!points.empty())
    for (const auto& kv : points.front()) header.push_back(kv.first);
  for (const char* h : {"status", "converged", "iterations", "lambda_hat", "gap", "exit_code"})
    header.emplace_back(h);
  write_manifest_row(csv, header);
  bool crashed = false;
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::vector<std::string> row{std::to_string(p)};
    for (const auto& kv : points[p]) row.push_back(kv.second);
    const auto& o = out[p];
    row.insert(row.end(), {o.status, o.converged ? "1" : "0", std::to_string(o.iterations),
                           num(o.lambda_hat), num(o.gap), std::to_string(o.code)});
    write_manifest_row(csv, row);
    crashed = crashed || o.status == "crashed";
    if (!o.message.empty()) std::cerr << "point " << p << ": " << o.message << "\n";
  }
  say(opt, "sweep: " + std::to_string(points.size()) + " points" + (crashed ? " (some crashed)" : ""));
  return crashed ? kExitSweepPartial : kExitOk;
}

}  // namespace vfpk
