#pragma once

#include <optional>
#include <vector>

#include "vfpk/grid.hpp"
#include "vfpk/kernels.hpp"
#include "vfpk/potentials.hpp"

namespace vfpk {

// Everything the fixed-point map needs, sampled once on a grid.
struct SteadyProblem {
  SteadyProblem(const ConfinementPotential& potential, const InteractionKernel& kernel,
                const SpatialGrid& grid);

  SpatialGrid grid;
  ConfinementPotential potential;  // normalized on grid
  InteractionKernel kernel;
  PotentialSamples v;
  Field e_minus_v;
  Convolver conv;       // K
  Convolver conv_even;  // K^e (for the free energy)
};

enum class FixedPointStatus { Converged, MaxIterations };

struct SteadyState {
  DensityField rho_star;
  Field v_star;  // V + Kρ★ shifted so that rho_star = e^{-v_star}
  Field v_bare;  // V
  std::vector<Field> v_star_grad;
  double zeta = 0.0;
  std::vector<double> residuals;
  std::vector<double> free_energy_history;
  bool converged = false;
  FixedPointStatus status = FixedPointStatus::MaxIterations;
  double omega = 1.0;
  int iterations = 0;

  // Ratios r_{n+1}/r_n of consecutive residuals.
  std::vector<double> contraction_factors() const;
  bool residuals_monotone() const;
};

DensityField s_map(const SteadyProblem& pb, const DensityField& rho);
DensityField t_map(const SteadyProblem& pb, const DensityField& rho);
double estimate_zeta(const SteadyProblem& pb);

struct FixedPointOptions {
  double omega = 0.0;  // 0 selects 1 or 1/2 from the Lipschitz constant 2ζe^ζ
  double tol = 1e-12;
  int max_iter = 500;
  bool allow_nonpositive_kernel = false;
  std::optional<Field> initial;  // defaults to e^{-V}
  bool track_free_energy = true;
};

SteadyState solve_fixed_point(const SteadyProblem& pb, const FixedPointOptions& opt = {});

// Builds the SteadyState record for a given density (no iteration).
SteadyState steady_state_from_density(const SteadyProblem& pb, const DensityField& rho);

double macro_free_energy(const DensityField& rho, const Field& V, const Convolver& even);
double macro_free_energy(const DensityField& rho, const Field& V, const KernelSplit& split);

struct UniquenessReport {
  int attempts = 0;
  int converged = 0;
  double max_pairwise_l1 = 0.0;
  bool coincide = false;
};

UniquenessReport uniqueness_probe(const SteadyProblem& pb, int attempts, double tol,
                                  unsigned long long seed = 1);

}  // namespace vfpk
