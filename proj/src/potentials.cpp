#include "vfpk/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vfpk/errors.hpp"
#include "vfpk/spectral.hpp"

namespace vfpk {

std::string to_string(PotentialFamily f) {
  switch (f) {
    case PotentialFamily::Quadratic: return "Quadratic";
    case PotentialFamily::PowerGrowth: return "PowerGrowth";
    case PotentialFamily::LogPower: return "LogPower";
    case PotentialFamily::Tabulated: return "Tabulated";
  }
  return "?";
}

PotentialFamily potential_family_from_string(const std::string& s) {
  if (s == "Quadratic") return PotentialFamily::Quadratic;
  if (s == "PowerGrowth") return PotentialFamily::PowerGrowth;
  if (s == "LogPower") return PotentialFamily::LogPower;
  if (s == "Tabulated") return PotentialFamily::Tabulated;
  throw DomainError("unknown potential family '" + s + "'");
}

ConfinementPotential ConfinementPotential::quadratic(int dim) {
  ConfinementPotential p;
  p.family = PotentialFamily::Quadratic;
  p.dim = dim;
  p.additive_constant = 0.5 * dim * std::log(2.0 * M_PI);
  return p;
}

ConfinementPotential ConfinementPotential::power_growth(double alpha, int dim) {
  if (!(alpha > 0)) throw DomainError("PowerGrowth needs alpha > 0");
  ConfinementPotential p;
  p.family = PotentialFamily::PowerGrowth;
  p.alpha = alpha;
  p.dim = dim;
  return p;
}

ConfinementPotential ConfinementPotential::log_power(double alpha, int dim) {
  if (!(alpha > 0)) throw DomainError("LogPower needs alpha > 0");
  ConfinementPotential p;
  p.family = PotentialFamily::LogPower;
  p.alpha = alpha;
  p.dim = dim;
  return p;
}

ConfinementPotential ConfinementPotential::tabulated(SpatialGrid grid, Field samples) {
  if (samples.size() != grid.size()) throw DomainError("tabulated potential size mismatch");
  ConfinementPotential p;
  p.family = PotentialFamily::Tabulated;
  p.dim = grid.dim();
  p.table_grid = std::move(grid);
  p.table = std::move(samples);
  return p;
}

namespace {

struct Radial {
  double v, d1, d1_over_r, d2;
};

// Radial profile V(r) and derivatives, with the r -> 0 limits of V'(r)/r.
Radial radial_profile(const ConfinementPotential& p, double r) {
  switch (p.family) {
    case PotentialFamily::Quadratic:
      return {0.5 * r * r, r, 1.0, 1.0};
    case PotentialFamily::PowerGrowth: {
      const double q = 1.0 + p.alpha;
      const double s2 = 1.0 + r * r;
      const double a = q * std::pow(s2, 0.5 * q - 1.0);
      const double d2 = a + q * (q - 2.0) * r * r * std::pow(s2, 0.5 * q - 2.0);
      return {std::pow(s2, 0.5 * q), a * r, a, d2};
    }
    case PotentialFamily::LogPower: {
      const double al = p.alpha;
      const double s2 = 1.0 + r * r;
      const double s = std::sqrt(s2);
      if (r == 0.0) {
        const double lim = al == 1.0 ? 2.0 : (al > 1.0 ? 0.0 : std::numeric_limits<double>::infinity());
        return {0.0, 0.0, lim, lim};
      }
      const double L = std::log1p(r * r);
      const double La = std::pow(L, al);
      const double Lp = 2.0 * r / s2;
      const double Lpp = 2.0 * (1.0 - r * r) / (s2 * s2);
      const double dLa = al * std::pow(L, al - 1.0) * Lp;
      const double d2La = al * (al - 1.0) * std::pow(L, al - 2.0) * Lp * Lp + al * std::pow(L, al - 1.0) * Lpp;
      const double d1 = (r / s) * La + s * dLa;
      const double d2 = La / (s2 * s) + 2.0 * (r / s) * dLa + s * d2La;
      const double d1r = La / s + 2.0 * al * std::pow(L, al - 1.0) / s;
      return {s * La, d1, d1r, d2};
    }
    case PotentialFamily::Tabulated:
      break;
  }
  throw DomainError("radial profile requested for tabulated potential");
}

// Keys cubic convolution kernel (a = -1/2) and its first two derivatives.
void keys(double s, double& w, double& dw, double& d2w) {
  constexpr double a = -0.5;
  const double sg = s < 0 ? -1.0 : 1.0;
  const double t = std::abs(s);
  if (t <= 1.0) {
    w = (a + 2) * t * t * t - (a + 3) * t * t + 1;
    dw = sg * (3 * (a + 2) * t * t - 2 * (a + 3) * t);
    d2w = 6 * (a + 2) * t - 2 * (a + 3);
  } else if (t < 2.0) {
    w = a * t * t * t - 5 * a * t * t + 8 * a * t - 4 * a;
    dw = sg * (3 * a * t * t - 10 * a * t + 8 * a);
    d2w = 6 * a * t - 10 * a;
  } else {
    w = dw = d2w = 0.0;
  }
}

// Node value with linear extrapolation one cell past either end of each axis.
double table_value(const ConfinementPotential& p, std::array<int, 3> idx, int axis = 0) {
  const SpatialGrid& g = p.table_grid;
  if (axis == g.dim()) return p.table[g.ravel(idx)];
  const int n = g.nodes(axis);
  if (idx[axis] < 0) {
    auto i0 = idx, i1 = idx;
    i0[axis] = 0;
    i1[axis] = 1;
    const int k = -idx[axis];
    return (1 + k) * table_value(p, i0, axis + 1) - k * table_value(p, i1, axis + 1);
  }
  if (idx[axis] > n - 1) {
    auto i0 = idx, i1 = idx;
    i0[axis] = n - 1;
    i1[axis] = n - 2;
    const int k = idx[axis] - (n - 1);
    return (1 + k) * table_value(p, i0, axis + 1) - k * table_value(p, i1, axis + 1);
  }
  return table_value(p, idx, axis + 1);
}

PotentialValue eval_tabulated(const ConfinementPotential& p, const Point& x) {
  const SpatialGrid& g = p.table_grid;
  const int d = g.dim();
  int base[3]{0, 0, 0};
  double w[3][4], dw[3][4], d2w[3][4];
  for (int a = 0; a < d; ++a) {
    const double lo = g.center(a) - g.half_width(a), hi = g.center(a) + g.half_width(a);
    if (x[a] < lo - 1e-12 || x[a] > hi + 1e-12)
      throw DomainError("tabulated potential evaluated outside its box");
    const double h = g.spacing(a);
    const double t = (x[a] - g.coord(a, 0)) / h;
    base[a] = static_cast<int>(std::floor(t));
    for (int k = 0; k < 4; ++k) {
      keys(t - (base[a] - 1 + k), w[a][k], dw[a][k], d2w[a][k]);
      dw[a][k] /= h;
      d2w[a][k] /= h * h;
    }
  }
  double val = 0.0;
  double grad[3]{0, 0, 0};
  double hess[3][3]{};
  const int counts[3]{4, d > 1 ? 4 : 1, d > 2 ? 4 : 1};
  for (int i = 0; i < counts[0]; ++i)
    for (int j = 0; j < counts[1]; ++j)
      for (int k = 0; k < counts[2]; ++k) {
        const int off[3]{i, j, k};
        std::array<int, 3> idx{0, 0, 0};
        for (int a = 0; a < d; ++a) idx[a] = base[a] - 1 + off[a];
        const double f = table_value(p, idx);
        double prod = 1.0;
        for (int a = 0; a < d; ++a) prod *= w[a][off[a]];
        val += prod * f;
        for (int a = 0; a < d; ++a) {
          double ga = 1.0;
          for (int b = 0; b < d; ++b) ga *= (b == a ? dw[b][off[b]] : w[b][off[b]]);
          grad[a] += ga * f;
          for (int c = 0; c < d; ++c) {
            double hac = 1.0;
            for (int b = 0; b < d; ++b) {
              if (a == c && b == a) hac *= d2w[b][off[b]];
              else if (b == a || b == c) hac *= dw[b][off[b]];
              else hac *= w[b][off[b]];
            }
            hess[a][c] += hac * f;
          }
        }
      }
  PotentialValue out;
  out.value = val + p.additive_constant;
  double fro = 0.0;
  for (int a = 0; a < d; ++a) {
    out.gradient[a] = grad[a];
    for (int c = 0; c < d; ++c) fro += hess[a][c] * hess[a][c];
  }
  out.hessian_norm = std::sqrt(fro);
  return out;
}

}  // namespace

PotentialValue eval_potential(const ConfinementPotential& p, const Point& x) {
  if (p.family == PotentialFamily::Tabulated) return eval_tabulated(p, x);
  double r2 = 0.0;
  for (int a = 0; a < p.dim; ++a) r2 += x[a] * x[a];
  const double r = std::sqrt(r2);
  const Radial rad = radial_profile(p, r);
  PotentialValue out;
  out.value = rad.v + p.additive_constant;
  for (int a = 0; a < p.dim; ++a) out.gradient[a] = rad.d1_over_r * x[a];
  // Radial Hessian: V'' on the radial direction, V'/r on the d-1 tangential ones.
  if (p.dim == 1) out.hessian_norm = std::abs(rad.d2);
  else out.hessian_norm = std::sqrt(rad.d2 * rad.d2 + (p.dim - 1) * rad.d1_over_r * rad.d1_over_r);
  return out;
}

PotentialSamples sample_potential(const ConfinementPotential& p, const SpatialGrid& grid) {
  if (p.dim != grid.dim()) throw DomainError("potential and grid dimensions differ");
  PotentialSamples s;
  const std::size_t n = grid.size();
  s.value.resize(n);
  s.hessian_norm.resize(n);
  s.gradient.assign(grid.dim(), Field(n));
  for (std::size_t k = 0; k < n; ++k) {
    const auto pv = eval_potential(p, grid.point(k));
    if (!std::isfinite(pv.value)) throw NumericalError("potential is not finite at a grid node");
    s.value[k] = pv.value;
    s.hessian_norm[k] = pv.hessian_norm;
    for (int a = 0; a < grid.dim(); ++a) s.gradient[a][k] = pv.gradient[a];
  }
  return s;
}

ConfinementPotential normalize(const ConfinementPotential& p, const SpatialGrid& grid) {
  const auto s = sample_potential(p, grid);
  Field w(s.value.size());
  // Factor out the minimum so the sum cannot overflow for large constants.
  const double vmin = *std::min_element(s.value.begin(), s.value.end());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::exp(-(s.value[k] - vmin));
  const double mass = grid.integrate(w);
  ConfinementPotential out = p;
  out.additive_constant = p.additive_constant + (std::log(mass) - vmin);
  const double scale = 1.0 / mass;
  const double edge = grid.boundary_max_abs(w) * scale;
  if (edge >= 1e-14)
    throw DomainError("e^{-V} is " + std::to_string(edge) +
                      " at the box boundary (needs < 1e-14); enlarge the box");
  return out;
}

AssumptionReportV verify_assumption_confinement(const ConfinementPotential& p,
                                                const SpatialGrid& grid,
                                                const std::vector<double>& eps_list) {
  const auto s = sample_potential(p, grid);
  const std::size_t n = grid.size();
  Field gnorm(n), w(n), weighted(n);
  for (std::size_t k = 0; k < n; ++k) {
    double g2 = 0.0;
    for (int a = 0; a < grid.dim(); ++a) g2 += s.gradient[a][k] * s.gradient[a][k];
    gnorm[k] = std::sqrt(g2);
    w[k] = std::exp(-s.value[k]);
    weighted[k] = (1.0 + g2) * w[k];
  }
  AssumptionReportV rep;
  rep.r_v = std::max(norm_lp(grid, weighted, 1.0), norm_lp(grid, weighted, INFINITY));
  rep.mass_defect = std::abs(1.0 - grid.integrate(w));
  for (double eps : eps_list) {
    double c = 0.0;
    for (std::size_t k = 0; k < n; ++k) c = std::max(c, s.hessian_norm[k] - eps * gnorm[k]);
    rep.smoothness_pairs.emplace_back(eps, c);
  }
  rep.poincare_constant = witten_gap(s.value, grid).poincare_constant;
  return rep;
}

}  // namespace vfpk
