#include "vfpk/linear.hpp"

#include <cmath>

#include "vfpk/errors.hpp"
#include "vfpk/fft.hpp"

namespace vfpk {

LinearStructure::LinearStructure(const SteadyState& ss, const InteractionKernel& kernel, int n_modes,
                                 double nu)
    : grid_(ss.rho_star.grid()), n_x_(static_cast<int>(grid_.size())), n_v_(n_modes),
      h_(grid_.spacing(0)), nu_(nu) {
  if (grid_.dim() != 1) throw DomainError("linearized structure is one-dimensional");
  if (n_modes < 2) throw DomainError("linearized structure needs at least two Hermite modes");
  sqrt_rho_.resize(n_x_);
  for (int i = 0; i < n_x_; ++i) {
    if (!(ss.rho_star[i] > 0)) throw DomainError("steady density must be positive");
    sqrt_rho_[i] = std::sqrt(ss.rho_star[i]);
  }
  w_.resize(n_x_);
  for (int i = 0; i < n_x_; ++i) {
    const double r = i + 1 < n_x_ ? sqrt_rho_[i + 1] : 0.0;
    const double l = i > 0 ? sqrt_rho_[i - 1] : 0.0;
    w_[i] = -(r - l) / (2.0 * h_) / sqrt_rho_[i];
  }
  even_ = Convolver(even_odd_split(kernel, grid_).even);
}

Coeffs LinearStructure::u_from_h(const Coeffs& hc) const {
  Coeffs u = hc;
  for (int i = 0; i < n_x_; ++i) u.col(i) /= sqrt_rho_[i];
  return u;
}

Coeffs LinearStructure::h_from_u(const Coeffs& u) const {
  Coeffs hc = u;
  for (int i = 0; i < n_x_; ++i) hc.col(i) *= sqrt_rho_[i];
  return hc;
}

Coeffs LinearStructure::u_from_state(const PhaseSpaceState& F) const {
  Coeffs hc = F.coeffs.topRows(std::min<int>(F.n_modes(), n_v_));
  if (hc.rows() < n_v_) {
    Coeffs pad = Coeffs::Zero(n_v_, n_x_);
    pad.topRows(hc.rows()) = hc;
    hc = pad;
  }
  for (int i = 0; i < n_x_; ++i) hc(0, i) -= sqrt_rho_[i] * sqrt_rho_[i];
  return u_from_h(hc);
}

Coeffs LinearStructure::u_from_f(const Coeffs& f) const { return h_from_u(f); }
Coeffs LinearStructure::f_from_u(const Coeffs& u) const { return u_from_h(u); }

Field LinearStructure::dx(const Field& y) const {
  Field out(n_x_);
  for (int i = 0; i < n_x_; ++i) {
    const double r = i + 1 < n_x_ ? y[i + 1] : 0.0;
    const double l = i > 0 ? y[i - 1] : 0.0;
    out[i] = (r - l) / (2.0 * h_) + w_[i] * y[i];
  }
  return out;
}

Field LinearStructure::dx_adjoint(const Field& y) const {
  Field out(n_x_);
  for (int i = 0; i < n_x_; ++i) {
    const double r = i + 1 < n_x_ ? y[i + 1] : 0.0;
    const double l = i > 0 ? y[i - 1] : 0.0;
    out[i] = -(r - l) / (2.0 * h_) + w_[i] * y[i];
  }
  return out;
}

Field LinearStructure::psi_even(const Field& u0) const {
  if (even_.is_zero()) return Field(n_x_, 0.0);
  Field rho(n_x_);
  for (int i = 0; i < n_x_; ++i) rho[i] = sqrt_rho_[i] * u0[i];
  return even_.apply(rho);
}

namespace {

Field row(const Coeffs& c, int n) {
  Field out(c.cols());
  for (int i = 0; i < c.cols(); ++i) out[i] = c(n, i);
  return out;
}

void add_row(Coeffs& c, int n, const Field& f, double s = 1.0) {
  for (int i = 0; i < c.cols(); ++i) c(n, i) += s * f[i];
}

double sum_sq(const Field& f) {
  double s = 0.0;
  for (double x : f) s += x * x;
  return s;
}

}  // namespace

Coeffs LinearStructure::apply_T(const Coeffs& u) const {
  Coeffs out = Coeffs::Zero(n_v_, n_x_);
  for (int n = 0; n < n_v_; ++n) {
    Field vu(n_x_, 0.0), skew(n_x_, 0.0);
    const double dn = std::sqrt(double(n)), up = std::sqrt(n + 1.0);
    for (int i = 0; i < n_x_; ++i) {
      const double lo = n > 0 ? u(n - 1, i) : 0.0;
      const double hi = n + 1 < n_v_ ? u(n + 1, i) : 0.0;
      vu[i] = dn * lo + up * hi;
      skew[i] = dn * lo - up * hi;
    }
    // X ⊗ D_c plus (Dvᵀ - Dv) ⊗ w, regrouped as centred differences.
    for (int i = 0; i < n_x_; ++i) {
      const double r = i + 1 < n_x_ ? vu[i + 1] : 0.0;
      const double l = i > 0 ? vu[i - 1] : 0.0;
      out(n, i) = (r - l) / (2.0 * h_) + w_[i] * skew[i];
    }
  }
  if (!even_.is_zero()) {
    const Field psi = psi_even(row(u, 0));
    Field sp(n_x_);
    for (int i = 0; i < n_x_; ++i) sp[i] = sqrt_rho_[i] * psi[i];
    add_row(out, 1, dx(sp));
  }
  return out;
}

Coeffs LinearStructure::apply_L(const Coeffs& u) const {
  Coeffs out = u;
  for (int n = 0; n < n_v_; ++n) out.row(n) *= -nu_ * n;
  return out;
}

Coeffs LinearStructure::apply_Pi(const Coeffs& u) const {
  Coeffs out = Coeffs::Zero(n_v_, n_x_);
  out.row(0) = u.row(0);
  return out;
}

double LinearStructure::l2_dot(const Coeffs& a, const Coeffs& b) const {
  return h_ * (a.array() * b.array()).sum();
}

double LinearStructure::gram(const Coeffs& a, const Coeffs& b) const {
  double s = l2_dot(a, b);
  if (!even_.is_zero()) {
    const Field psi = psi_even(row(a, 0));
    double t = 0.0;
    for (int i = 0; i < n_x_; ++i) t += psi[i] * sqrt_rho_[i] * b(0, i);
    s += h_ * t;
  }
  return s;
}

Field LinearStructure::macro_B(const Field& g0) const {
  Field y = g0;
  if (!even_.is_zero()) {
    const Field psi = psi_even(g0);
    for (int i = 0; i < n_x_; ++i) y[i] += sqrt_rho_[i] * psi[i];
  }
  return dx(y);
}

Field LinearStructure::macro_Bt(const Field& y) const {
  Field z = dx_adjoint(y);
  if (!even_.is_zero()) {
    const Field psi = psi_even(z);
    for (int i = 0; i < n_x_; ++i) z[i] += sqrt_rho_[i] * psi[i];
  }
  return z;
}

Field LinearStructure::macro_gram(const Field& g0) const {
  Field out = g0;
  if (!even_.is_zero()) {
    const Field psi = psi_even(g0);
    for (int i = 0; i < n_x_; ++i) out[i] += sqrt_rho_[i] * psi[i];
  }
  for (auto& x : out) x *= h_;
  return out;
}

Field LinearStructure::solve_macro_system(const Field& rhs, CgInfo* info) const {
  auto apply = [&](const Field& g) {
    Field a = macro_gram(g);
    const Field bb = macro_Bt(macro_B(g));
    for (int i = 0; i < n_x_; ++i) a[i] += h_ * bb[i];
    return a;
  };
  Field diag(n_x_);
  for (int i = 0; i < n_x_; ++i) diag[i] = h_ * (1.0 + w_[i] * w_[i] + 0.5 / (h_ * h_));
  const double bnorm = std::sqrt(sum_sq(rhs));
  Field x(n_x_, 0.0);
  if (bnorm == 0.0) {
    if (info) *info = {0, 0.0};
    return x;
  }
  Field r = rhs, z(n_x_), p(n_x_);
  for (int i = 0; i < n_x_; ++i) z[i] = r[i] / diag[i];
  p = z;
  double rz = 0.0;
  for (int i = 0; i < n_x_; ++i) rz += r[i] * z[i];
  const int max_it = 10 * n_x_;
  for (int it = 1; it <= max_it; ++it) {
    const Field ap = apply(p);
    double pap = 0.0;
    for (int i = 0; i < n_x_; ++i) pap += p[i] * ap[i];
    if (!(pap > 0)) throw NumericalError("elliptic operator lost positivity (coercivity smallness violated)");
    const double alpha = rz / pap;
    for (int i = 0; i < n_x_; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rel = std::sqrt(sum_sq(r)) / bnorm;
    if (rel < 1e-10) {
      if (info) *info = {it, rel};
      return x;
    }
    double rz_new = 0.0;
    for (int i = 0; i < n_x_; ++i) {
      z[i] = r[i] / diag[i];
      rz_new += r[i] * z[i];
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n_x_; ++i) p[i] = z[i] + beta * p[i];
  }
  throw ConvergenceError("conjugate gradient did not converge in 10·N_x iterations");
}

Field LinearStructure::solve_dms_elliptic(const Field& r, CgInfo* info) const {
  return solve_macro_system(macro_gram(r), info);
}

Coeffs LinearStructure::apply_A(const Coeffs& u) const {
  Field rhs = macro_Bt(row(u, 1));
  for (auto& x : rhs) x *= h_;
  const Field g = solve_macro_system(rhs);
  Coeffs out = Coeffs::Zero(n_v_, n_x_);
  add_row(out, 0, g);
  return out;
}

double LinearStructure::gradx_sq(const Coeffs& u) const {
  double s = 0.0;
  for (int n = 0; n < n_v_; ++n) s += sum_sq(dx(row(u, n)));
  return h_ * s;
}

double LinearStructure::gradv_sq(const Coeffs& u) const {
  double s = 0.0;
  for (int n = 1; n < n_v_; ++n) s += n * u.row(n).squaredNorm();
  return h_ * s;
}

double LinearStructure::cross_vx(const Coeffs& u) const {
  double s = 0.0;
  for (int n = 0; n + 1 < n_v_; ++n) {
    const Field d = dx(row(u, n));
    const double c = std::sqrt(n + 1.0);
    for (int i = 0; i < n_x_; ++i) s += c * u(n + 1, i) * d[i];
  }
  return h_ * s;
}

double LinearStructure::hs_norm(const Coeffs& u, double s) const {
  const int P = 2 * n_x_;
  RealFft fft({P});
  double acc = 0.0;
  for (int n = 0; n < n_v_; ++n) {
    Field pad(P, 0.0);
    for (int i = 0; i < n_x_; ++i) pad[i] = u(n, i);
    const Spectrum sp = fft.forward(pad);
    for (int j = 0; j < static_cast<int>(sp.size()); ++j) {
      const double xi = 2.0 * M_PI * j / (P * h_);
      const double mult = (j == 0 || j == P / 2) ? 1.0 : 2.0;
      acc += mult * std::pow(1.0 + xi * xi, s) * std::norm(sp[j]);
    }
  }
  return std::sqrt(acc * h_ / P);
}

double LinearStructure::e0(const Coeffs& u, double eps) const {
  const double tw = gram(u, u);
  if (eps == 0.0) return 0.5 * tw;
  return 0.5 * tw + eps * gram(apply_A(u), u);
}

double LinearStructure::e11(const Coeffs& u, double eps, double a, double b, double c) const {
  return e0(u, eps) + a * gradv_sq(u) + b * cross_vx(u) + c * gradx_sq(u);
}

E11Parameters default_e11_parameters(double eps) {
  E11Parameters p{std::pow(eps, 16), std::pow(eps, 20), std::pow(eps, 21)};
  if (p.c < 1e-8) {
    const double s = 1e-8 / p.c;
    p.a *= s;
    p.b *= s;
    p.c *= s;
  }
  return p;
}

}  // namespace vfpk
