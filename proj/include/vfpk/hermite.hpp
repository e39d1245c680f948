#pragma once

#include <Eigen/Dense>
#include <vector>

#include "vfpk/grid.hpp"

namespace vfpk {

using Coeffs = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;  // sum to 1 (probability measure M dv)
};

// Orthonormal probabilists' Hermite polynomials H_n under M(v) dv; the
// velocity basis is φ_n = H_n M, so F = Σ C_n φ_n and F/M = Σ C_n H_n.
class HermiteBasis {
 public:
  explicit HermiteBasis(int n_modes);

  int n_modes() const { return n_; }
  int d_v() const { return 1; }
  const std::vector<double>& ladder_up() const { return up_; }      // √(n+1)
  const std::vector<double>& ladder_down() const { return down_; }  // √n

  // Truncated matrix of v-multiplication acting on coefficient vectors.
  Eigen::MatrixXd velocity_matrix() const;
  // Largest |eigenvalue| of velocity_matrix().
  double max_speed() const { return max_speed_; }

  static GaussHermite quadrature(int points);
  // H_n(v) for n < n_modes as rows, one column per v.
  Eigen::MatrixXd polynomials(const std::vector<double>& v) const;

 private:
  int n_;
  std::vector<double> up_;
  std::vector<double> down_;
  double max_speed_ = 0.0;
};

double maxwellian(double v);
// φ_n(v) = H_n(v) M(v).
double hermite_function(int n, double v);

struct PhaseSpaceState {
  Coeffs coeffs;  // n_modes × N_x
  SpatialGrid grid;
  double time = 0.0;

  PhaseSpaceState() = default;
  PhaseSpaceState(SpatialGrid g, int n_modes)
      : coeffs(Coeffs::Zero(n_modes, g.size())), grid(std::move(g)) {}
  int n_modes() const { return static_cast<int>(coeffs.rows()); }
  int n_x() const { return static_cast<int>(coeffs.cols()); }
  double mass() const;
  bool finite() const { return coeffs.allFinite(); }
};

// Ladder actions on the profile F/M = Σ C_n H_n in L²(M):
// (v g)_n = √n C_{n-1} + √(n+1) C_{n+1},  (∂_v g)_n = √(n+1) C_{n+1},
// (∂_v* g)_n = √n C_{n-1} with ∂_v* = -∂_v + v. The top mode is truncated.
PhaseSpaceState apply_v_multiplication(const PhaseSpaceState& s);
PhaseSpaceState apply_dv(const PhaseSpaceState& s);
PhaseSpaceState apply_dv_star(const PhaseSpaceState& s);
PhaseSpaceState fokker_planck_decay(const PhaseSpaceState& s, double nu, double dt);
// Multiply mode n by exp(-36 (n/N_v)^36).
PhaseSpaceState apply_filter(const PhaseSpaceState& s);

struct Moments {
  DensityField density;
  Field current;
  Field kinetic_energy_density;  // ½∫v²F dv
};

Moments moments(const PhaseSpaceState& s);

// Coefficients of M(v - b) in the φ_n basis: b^n / √(n!).
std::vector<double> shifted_maxwellian_coeffs(double b, int n_modes);

}  // namespace vfpk
