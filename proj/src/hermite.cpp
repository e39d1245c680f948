#include "vfpk/hermite.hpp"

#include <cmath>

#include "vfpk/errors.hpp"

namespace vfpk {

HermiteBasis::HermiteBasis(int n) : n_(n) {
  if (n < 2) throw DomainError("Hermite basis needs at least two modes");
  for (int k = 0; k < n; ++k) {
    up_.push_back(std::sqrt(k + 1.0));
    down_.push_back(std::sqrt(double(k)));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(velocity_matrix(), Eigen::EigenvaluesOnly);
  max_speed_ = es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd HermiteBasis::velocity_matrix() const {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n_, n_);
  for (int k = 0; k + 1 < n_; ++k) X(k, k + 1) = X(k + 1, k) = up_[k];
  return X;
}

GaussHermite HermiteBasis::quadrature(int points) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(points), off(points - 1);
  for (int k = 0; k + 1 < points; ++k) off[k] = std::sqrt(k + 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  GaussHermite q;
  // Christoffel weights 1 / sum_k p_k(x)^2 keep full relative accuracy in the
  // tails, where squared eigenvector entries only carry absolute accuracy.
  for (int j = 0; j < points; ++j) {
    const double x = es.eigenvalues()[j];
    double p0 = 1.0, p1 = x, sum = 1.0 + (points > 1 ? x * x : 0.0);
    for (int k = 1; k + 1 < points; ++k) {
      const double p2 = (x * p1 - std::sqrt(double(k)) * p0) / std::sqrt(k + 1.0);
      p0 = p1;
      p1 = p2;
      sum += p2 * p2;
    }
    q.nodes.push_back(x);
    q.weights.push_back(1.0 / sum);
  }
  return q;
}

Eigen::MatrixXd HermiteBasis::polynomials(const std::vector<double>& v) const {
  Eigen::MatrixXd H(n_, v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    H(0, j) = 1.0;
    H(1, j) = v[j];
    for (int k = 1; k + 1 < n_; ++k) H(k + 1, j) = (v[j] * H(k, j) - down_[k] * H(k - 1, j)) / up_[k];
  }
  return H;
}

double maxwellian(double v) { return std::exp(-0.5 * v * v) / std::sqrt(2.0 * M_PI); }

double hermite_function(int n, double v) {
  double h0 = 1.0, h1 = v;
  if (n == 0) return maxwellian(v);
  for (int k = 1; k < n; ++k) {
    const double h2 = (v * h1 - std::sqrt(double(k)) * h0) / std::sqrt(k + 1.0);
    h0 = h1;
    h1 = h2;
  }
  return h1 * maxwellian(v);
}

double PhaseSpaceState::mass() const {
  return coeffs.row(0).sum() * grid.cell_volume();
}

PhaseSpaceState apply_v_multiplication(const PhaseSpaceState& s) {
  PhaseSpaceState out = s;
  const int n = s.n_modes();
  out.coeffs.setZero();
  for (int k = 0; k < n; ++k) {
    if (k > 0) out.coeffs.row(k) += std::sqrt(double(k)) * s.coeffs.row(k - 1);
    if (k + 1 < n) out.coeffs.row(k) += std::sqrt(k + 1.0) * s.coeffs.row(k + 1);
  }
  return out;
}

PhaseSpaceState apply_dv(const PhaseSpaceState& s) {
  PhaseSpaceState out = s;
  const int n = s.n_modes();
  out.coeffs.setZero();
  for (int k = 0; k + 1 < n; ++k) out.coeffs.row(k) = std::sqrt(k + 1.0) * s.coeffs.row(k + 1);
  return out;
}

PhaseSpaceState apply_dv_star(const PhaseSpaceState& s) {
  PhaseSpaceState out = s;
  const int n = s.n_modes();
  out.coeffs.setZero();
  for (int k = 1; k < n; ++k) out.coeffs.row(k) = std::sqrt(double(k)) * s.coeffs.row(k - 1);
  return out;
}

PhaseSpaceState fokker_planck_decay(const PhaseSpaceState& s, double nu, double dt) {
  PhaseSpaceState out = s;
  for (int k = 1; k < s.n_modes(); ++k) out.coeffs.row(k) *= std::exp(-nu * k * dt);
  return out;
}

PhaseSpaceState apply_filter(const PhaseSpaceState& s) {
  PhaseSpaceState out = s;
  const double nv = s.n_modes();
  for (int k = 1; k < s.n_modes(); ++k) out.coeffs.row(k) *= std::exp(-36.0 * std::pow(k / nv, 36.0));
  return out;
}

Moments moments(const PhaseSpaceState& s) {
  Moments m;
  const int nx = s.n_x();
  Field rho(nx), j(nx, 0.0), e(nx, 0.0);
  for (int i = 0; i < nx; ++i) {
    rho[i] = s.coeffs(0, i);
    if (s.n_modes() > 1) j[i] = s.coeffs(1, i);
    const double c2 = s.n_modes() > 2 ? s.coeffs(2, i) : 0.0;
    e[i] = 0.5 * (rho[i] + std::sqrt(2.0) * c2);
  }
  m.density = DensityField(s.grid, std::move(rho));
  m.current = std::move(j);
  m.kinetic_energy_density = std::move(e);
  return m;
}

std::vector<double> shifted_maxwellian_coeffs(double b, int n_modes) {
  std::vector<double> c(n_modes);
  c[0] = 1.0;
  for (int k = 1; k < n_modes; ++k) c[k] = c[k - 1] * b / std::sqrt(double(k));
  return c;
}

}  // namespace vfpk
