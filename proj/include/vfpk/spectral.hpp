#pragma once

#include <cmath>

#include "vfpk/grid.hpp"

namespace vfpk {

struct SteadyState;

enum class GapMeasure { BarePotential, SteadyState };

struct GapReport {
  double gap = 0.0;
  double poincare_constant = 0.0;
  double ground_state_defect = 0.0;
  GapMeasure measure = GapMeasure::BarePotential;
  // Steady-state measure only.
  double oscillation = 0.0;       // osc(V★ - V)
  double bare_gap = 0.0;          // gap of e^{-V}
  double holley_stroock_lower = 0.0;
  double holley_stroock_upper = 0.0;
  double holley_stroock_poincare = 0.0;  // C_P e^{osc}
  double c_star = NAN;                   // weighted constant ‖u ∇V★‖ <= C★ ‖∇u‖ (d = 1)
};

struct LanczosOptions {
  int max_iter = 600;
  double tol = 1e-9;
};

// Spectral gap of the Witten Laplacian of the potential samples V (not
// necessarily normalized). The operator is the symmetric ground-state
// transform of the weighted graph Laplacian of e^{-V}, so e^{-V/2} is an
// exact null vector and the discrete Poincaré inequality holds with 1/gap.
GapReport witten_gap(const Field& V, const SpatialGrid& grid, const LanczosOptions& opt = {});

// Apply the discrete Witten operator to u.
Field apply_witten(const Field& V, const SpatialGrid& grid, const Field& u);

// Discrete Dirichlet form Σ_edges w_e |Δu|²/h² · h^d for the weight w = e^{-V}.
double weighted_dirichlet(const Field& V, const SpatialGrid& grid, const Field& u);

GapReport steady_measure_gap(const SteadyState& ss, const LanczosOptions& opt = {});

// Smallest positive constant with ‖u g‖²_{L²(w)} <= C² × Dirichlet(u) on w-mean-zero u, d = 1.
double weighted_poincare_constant(const Field& V, const Field& g, const SpatialGrid& grid);

}  // namespace vfpk
