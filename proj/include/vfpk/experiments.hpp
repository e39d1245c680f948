#pragma once

#include <exception>
#include <map>
#include <string>

#include "vfpk/config.hpp"
#include "vfpk/kernels.hpp"
#include "vfpk/potentials.hpp"
#include "vfpk/solver.hpp"
#include "vfpk/steady.hpp"

namespace vfpk {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitNoConvergence = 3,
  kExitCfl = 4,
  kExitSweepPartial = 5,
};

struct RunOptions {
  bool quiet = false;
  int threads = 1;
};

SpatialGrid make_grid(const RunConfig& cfg);
ConfinementPotential make_potential(const RunConfig& cfg, const SpatialGrid& grid);
InteractionKernel make_kernel(const RunConfig& cfg);
EvolveConfig make_evolve_config(const RunConfig& cfg, EvolveMode mode);
FixedPointOptions make_fixed_point_options(const RunConfig& cfg);

// Solves for (or loads) the steady state described by cfg.
SteadyState obtain_steady_state(const RunConfig& cfg, const SteadyProblem& pb);

// Initial state for the configured perturbation. Nonlinear states hold F,
// linearized ones h = F - F★.
PhaseSpaceState make_initial_state(const RunConfig& cfg, const SteadyState& ss, EvolveMode mode);

// Global position/velocity moments of a nonlinear state.
std::map<std::string, double> phase_moments(const PhaseSpaceState& s);

// Maps an exception to the documented exit code.
int exit_code_for(const std::exception& e);

// Subcommands; outputs go to cfg.output_dir.
int run_steady(const RunConfig& cfg, const RunOptions& opt);
int run_evolve(const RunConfig& cfg, const RunOptions& opt);
int run_linear(const RunConfig& cfg, const RunOptions& opt);
int run_diagnose(const RunConfig& cfg, const RunOptions& opt);
int run_poincare(const RunConfig& cfg, const RunOptions& opt);
int run_sweep(const RunConfig& cfg, const RunOptions& opt);

// Thread count from VFPK_THREADS (default: hardware concurrency).
int threads_from_env();

}  // namespace vfpk
