#pragma once

#include <optional>

#include "vfpk/hermite.hpp"
#include "vfpk/kernels.hpp"
#include "vfpk/steady.hpp"

namespace vfpk {

// Linearized operators around a one-dimensional steady state, acting on
// u = √ρ★ f with f the relative perturbation F = F★(1 + f). With these
// variables L²(F★) is the Euclidean product scaled by the cell width, and
// the centred x-difference is conjugated so that √ρ★ is an exact null
// vector of the discrete ∂_x. This makes T exactly skew and L exactly
// symmetric in the twisted Gram geometry.
class LinearStructure {
 public:
  LinearStructure(const SteadyState& ss, const InteractionKernel& kernel, int n_modes, double nu);

  int n_x() const { return n_x_; }
  int n_v() const { return n_v_; }
  double h() const { return h_; }
  double nu() const { return nu_; }
  const SpatialGrid& grid() const { return grid_; }
  const Field& sqrt_rho() const { return sqrt_rho_; }
  const Field& half_log_derivative() const { return w_; }  // discrete V★'/2
  bool has_interaction() const { return !even_.is_zero(); }

  // Conversions between representations.
  Coeffs u_from_h(const Coeffs& h) const;   // h = F - F★ coefficients
  Coeffs h_from_u(const Coeffs& u) const;
  Coeffs u_from_state(const PhaseSpaceState& F) const;  // nonlinear F-coefficients
  Coeffs u_from_f(const Coeffs& f) const;
  Coeffs f_from_u(const Coeffs& u) const;

  // Conjugated ∂_x and its transpose on a single row.
  Field dx(const Field& y) const;
  Field dx_adjoint(const Field& y) const;
  // ψ^e of the macroscopic part u_0, i.e. K^e(√ρ★ u_0).
  Field psi_even(const Field& u0) const;

  Coeffs apply_T(const Coeffs& u) const;
  Coeffs apply_L(const Coeffs& u) const;
  Coeffs apply_Pi(const Coeffs& u) const;
  // Full linearized generator d/dt u = (L - T) u.
  Coeffs apply_generator(const Coeffs& u) const { return apply_L(u) - apply_T(u); }

  double l2_dot(const Coeffs& a, const Coeffs& b) const;
  double gram(const Coeffs& a, const Coeffs& b) const;  // twisted product

  // Macroscopic pieces: the mode-1 output of (TΠ) and the mode-0 Gram block.
  Field macro_B(const Field& g0) const;
  Field macro_Bt(const Field& y) const;
  Field macro_gram(const Field& g0) const;

  struct CgInfo {
    int iterations = 0;
    double relative_residual = 0.0;
  };
  // Solves (G_M + h BᵀB) g = rhs by preconditioned CG (rel. residual 1e-10, at most 10 N_x iterations).
  Field solve_macro_system(const Field& rhs, CgInfo* info = nullptr) const;
  // g + (TΠ)†(TΠ) g = r for a macroscopic field r.
  Field solve_dms_elliptic(const Field& r, CgInfo* info = nullptr) const;
  Coeffs apply_A(const Coeffs& u) const;

  // Norm pieces (squared unless noted).
  double l2_sq(const Coeffs& u) const { return l2_dot(u, u); }
  double gradx_sq(const Coeffs& u) const;
  double gradv_sq(const Coeffs& u) const;
  double cross_vx(const Coeffs& u) const;  // ⟨∇_v f, ∇_x f⟩
  double twisted_sq(const Coeffs& u) const { return gram(u, u); }
  double hs_norm(const Coeffs& u, double s) const;
  double e0(const Coeffs& u, double eps) const;
  double e11(const Coeffs& u, double eps, double a, double b, double c) const;

 private:
  SpatialGrid grid_;
  int n_x_, n_v_;
  double h_, nu_;
  Field sqrt_rho_;
  Field w_;
  Convolver even_;
};

struct E11Parameters {
  double a, b, c;
};
// a = ε^16, b = ε^20, c = ε^21 at ε = 1/2, rescaled so that c >= 1e-8.
E11Parameters default_e11_parameters(double eps = 0.5);

}  // namespace vfpk
