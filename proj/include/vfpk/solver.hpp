#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "vfpk/hermite.hpp"
#include "vfpk/kernels.hpp"
#include "vfpk/linear.hpp"
#include "vfpk/potentials.hpp"
#include "vfpk/steady.hpp"

namespace vfpk {

struct DiagnosticSeries;
class LinearStructure;

enum class EvolveMode { Nonlinear, Linearized };
enum class Limiter { None, MinMod, VanLeer, MC };
enum class XBoundary { Outflow, Periodic };

std::string to_string(Limiter l);
Limiter limiter_from_string(const std::string& s);

// Microscopic source φ (coefficients of f-profiles in the H_n basis); the
// solver injects ∇_v*φ, whose n = 0 row vanishes by construction.
using SourceTerm = std::function<Coeffs(double t, const PhaseSpaceState& state)>;

struct EvolveConfig {
  double nu = 1.0;
  double dt = 1e-3;
  double t_end = 1.0;
  double cfl_guard = 0.9;
  bool filter_on = false;
  EvolveMode mode = EvolveMode::Nonlinear;
  SourceTerm source;
  int output_stride = 1;
  Limiter limiter = Limiter::None;
  XBoundary boundary = XBoundary::Outflow;
};

// One-dimensional VFP solver: finite volumes in x, Hermite modes in v.
// Nonlinear states hold F-coefficients; linearized states hold the
// coefficients of h = F★ f = F - F★.
class KineticSolver {
 public:
  KineticSolver(const SpatialGrid& grid, int n_modes, const ConfinementPotential& potential,
                const InteractionKernel& kernel, EvolveConfig cfg,
                std::optional<SteadyState> steady = std::nullopt);

  const SpatialGrid& grid() const { return grid_; }
  const HermiteBasis& basis() const { return basis_; }
  const EvolveConfig& config() const { return cfg_; }
  const std::optional<SteadyState>& steady() const { return steady_; }
  const PotentialSamples& potential_samples() const { return v_; }
  const InteractionKernel& kernel() const { return kernel_; }
  const KernelSplit& split() const { return split_; }
  double dt_max() const;
  void check_cfl(double dt) const;

  void step_transport(PhaseSpaceState& s, double dt) const;
  // Applies exp(-dt E ∂_v) column-wise, to s + increment when one is given.
  void step_force(PhaseSpaceState& s, const Field& E, double dt, const Coeffs* increment = nullptr) const;
  // Force field E = -∂_x(V + ψ) (nonlinear) or -∂_x V★ (linearized).
  Field force_field(const PhaseSpaceState& s) const;
  // Linearized coupling -ρ★ ∂_x ψ_h placed in mode 1.
  Field linear_coupling(const PhaseSpaceState& s) const;
  void step(PhaseSpaceState& s) const;

  // Semi-discrete right-hand side (dt -> 0 limit of one step).
  Coeffs rhs(const PhaseSpaceState& s) const;

  // F★ = ρ★ M as a nonlinear state.
  PhaseSpaceState steady_phase_state() const;

 private:
  Field nonlinear_field(const Field& rho) const;
  void transport_row(double speed, const double* in, double* out, double dt) const;

  SpatialGrid grid_;
  HermiteBasis basis_;
  EvolveConfig cfg_;
  std::optional<SteadyState> steady_;
  PotentialSamples v_;
  InteractionKernel kernel_;
  KernelSplit split_;
  Convolver conv_;
  Eigen::MatrixXd char_vectors_;  // v-matrix = Q Λ Qᵀ
  Eigen::VectorXd char_speeds_;
  Field e_star_;                  // -∂_x V★ (linearized mode)
  // Linearized step: background field after the first half transport, and
  // the ladder images G F_bg at the two force substeps.
  Field lin_e_;
  Coeffs lin_g_[2];
};

struct EvolveResult;

using StepObserver = std::function<void(const PhaseSpaceState& state, long step)>;

struct EvolveOptions {
  std::vector<double> hs_list;        // fractional H^s_x orders to record
  bool weighted_columns = false;      // produce w_σ columns after fitting λ
  std::pair<double, double> fit_window{0.0, 0.0};
  double e0_eps = 0.1;
  std::optional<E11Parameters> e11;
  bool functionals = true;  // e0/e11 columns (one elliptic solve per row)
  StepObserver observer;
  // Experiment-defined columns evaluated on every recorded state.
  std::function<std::map<std::string, double>(const PhaseSpaceState&)> extra_columns;
};

struct EvolveResult {
  PhaseSpaceState final_state;
  PhaseSpaceState last_good;
  bool aborted = false;
  std::string message;
  long steps = 0;
  double lambda_hat = NAN;  // fitted when weighted columns are requested
};

// Runs the configured evolution and fills `series` with one row per output
// stride (plus the initial row).
EvolveResult evolve(const KineticSolver& solver, PhaseSpaceState initial, DiagnosticSeries& series,
                    const EvolveOptions& opt = {});

struct SteadyKineticReport {
  double residual_l2 = 0.0;                // L² norm of the discrete right-hand side
  double relative = 0.0;                   // relative to ‖F★‖
};

SteadyKineticReport verify_steady_kinetic(const SteadyState& ss, const KineticSolver& solver);

}  // namespace vfpk
