#include "vfpk/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

#include "vfpk/errors.hpp"

namespace vfpk {

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::Zero: return "Zero";
    case KernelFamily::Coulomb: return "Coulomb";
    case KernelFamily::Newton: return "Newton";
    case KernelFamily::Riesz: return "Riesz";
    case KernelFamily::Synchrotron: return "Synchrotron";
    case KernelFamily::LipschitzTable: return "LipschitzTable";
  }
  return "?";
}

KernelFamily kernel_family_from_string(const std::string& s) {
  static const std::map<std::string, KernelFamily> names{
      {"Zero", KernelFamily::Zero},       {"Coulomb", KernelFamily::Coulomb},
      {"Newton", KernelFamily::Newton},   {"Riesz", KernelFamily::Riesz},
      {"Synchrotron", KernelFamily::Synchrotron},
      {"LipschitzTable", KernelFamily::LipschitzTable}};
  auto it = names.find(s);
  if (it == names.end()) throw DomainError("unknown kernel family '" + s + "'");
  return it->second;
}

InteractionKernel InteractionKernel::zero(int dim) {
  InteractionKernel k;
  k.dim = dim;
  return k;
}

InteractionKernel InteractionKernel::coulomb(double strength, int dim) {
  if (dim < 3) throw DomainError("Coulomb kernel requires d >= 3 (kernels growing at infinity are unsupported)");
  if (strength < 0) throw DomainError("Coulomb strength must be nonnegative");
  InteractionKernel k;
  k.family = KernelFamily::Coulomb;
  k.strength = strength;
  k.alpha = 2.0;
  k.dim = dim;
  return k;
}

InteractionKernel InteractionKernel::newton(double strength, int dim) {
  InteractionKernel k = coulomb(strength, dim);
  k.family = KernelFamily::Newton;
  return k;
}

InteractionKernel InteractionKernel::riesz(double strength, double alpha, int dim) {
  if (dim < 2) throw DomainError("Riesz kernel requires d >= 2");
  if (!(alpha > 0.5 * dim && alpha <= dim)) throw DomainError("Riesz order must lie in (d/2, d]");
  if (strength < 0) throw DomainError("Riesz strength must be nonnegative");
  InteractionKernel k;
  k.family = KernelFamily::Riesz;
  k.strength = strength;
  k.alpha = alpha;
  k.dim = dim;
  return k;
}

InteractionKernel InteractionKernel::synchrotron(double strength) {
  if (strength < 0) throw DomainError("Synchrotron strength must be nonnegative");
  InteractionKernel k;
  k.family = KernelFamily::Synchrotron;
  k.strength = strength;
  k.dim = 1;
  return k;
}

InteractionKernel InteractionKernel::lipschitz_table(std::vector<double> x, std::vector<double> v,
                                                     int dim, double strength) {
  if (x.size() != v.size() || x.empty()) throw DomainError("kernel table needs matching nonempty columns");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw DomainError("kernel table abscissae must increase");
  InteractionKernel k;
  k.family = KernelFamily::LipschitzTable;
  k.strength = strength;
  k.dim = dim;
  k.table_x = std::move(x);
  k.table_k = std::move(v);
  return k;
}

InteractionKernel InteractionKernel::constant(double c, int dim) {
  return lipschitz_table({0.0}, {c}, dim);
}

bool InteractionKernel::singular() const { return singular_order() > 0.0; }

double InteractionKernel::singular_order() const {
  switch (family) {
    case KernelFamily::Coulomb:
    case KernelFamily::Newton: return dim - 2.0;
    case KernelFamily::Riesz: return dim - alpha;
    default: return 0.0;
  }
}

LebesgueExponents InteractionKernel::lebesgue_exponents() const {
  LebesgueExponents e;
  if (family == KernelFamily::Coulomb || family == KernelFamily::Newton ||
      family == KernelFamily::Riesz) {
    // 1/p = 1/2 - α/d, 1/q = 1/2 - (α-1)/d; written so integer data stays exact.
    const double dp = dim - 2.0 * alpha, dq = dim - 2.0 * (alpha - 1.0);
    e.p = dp > 0 ? 2.0 * dim / dp : INFINITY;
    e.q = dq > 0 ? 2.0 * dim / dq : INFINITY;
  }
  return e;
}

double synchrotron_profile(double x) {
  if (!(x > 0.0)) return 0.0;
  const double u = std::asinh(x);
  if (u < 1e-4) return (8.0 / 9.0) * u * (1.0 - (19.0 / 54.0) * u * u);
  // cosh(5u/3) - cosh(u) = 2 sinh(4u/3) sinh(u/3)
  return 4.0 * std::sinh(4.0 * u / 3.0) * std::sinh(u / 3.0) / std::sinh(2.0 * u);
}

double synchrotron_profile_derivative(double x) {
  if (!(x > 0.0)) return 0.0;
  const double u = std::asinh(x);
  const double dudx = 1.0 / std::sqrt(1.0 + x * x);
  if (u < 1e-4) return (8.0 / 9.0) * (1.0 - (19.0 / 18.0) * u * u) * dudx;
  const double n = 2.0 * std::sinh(4.0 * u / 3.0) * std::sinh(u / 3.0);
  const double dn = (5.0 / 3.0) * std::sinh(5.0 * u / 3.0) - std::sinh(u);
  const double s = std::sinh(2.0 * u);
  return 2.0 * (dn * s - 2.0 * std::cosh(2.0 * u) * n) / (s * s) * dudx;
}

namespace {

double radius(const Point& x, int dim) {
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) r2 += x[a] * x[a];
  return std::sqrt(r2);
}

double table_interp(const InteractionKernel& k, double s) {
  const auto& xs = k.table_x;
  const auto& ys = k.table_k;
  if (s <= xs.front()) return ys.front();
  if (s >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), s);
  const std::size_t j = static_cast<std::size_t>(it - xs.begin());
  const double t = (s - xs[j - 1]) / (xs[j] - xs[j - 1]);
  return (1 - t) * ys[j - 1] + t * ys[j];
}

double kernel_sign(const InteractionKernel& k) { return k.family == KernelFamily::Newton ? -1.0 : 1.0; }

}  // namespace

double eval_kernel(const InteractionKernel& k, const Point& x) {
  switch (k.family) {
    case KernelFamily::Zero: return 0.0;
    case KernelFamily::Synchrotron: return k.strength * synchrotron_profile(x[0]);
    case KernelFamily::LipschitzTable:
      return k.strength * table_interp(k, k.dim == 1 ? x[0] : radius(x, k.dim));
    default: break;
  }
  const double beta = k.singular_order();
  const double r = radius(x, k.dim);
  if (beta > 0 && r == 0.0) throw DomainError("kernel evaluated at its singularity");
  return kernel_sign(k) * k.strength * (beta > 0 ? std::pow(r, -beta) : 1.0);
}

Point eval_kernel_gradient(const InteractionKernel& k, const Point& x) {
  Point g{0, 0, 0};
  switch (k.family) {
    case KernelFamily::Zero: return g;
    case KernelFamily::Synchrotron:
      g[0] = k.strength * synchrotron_profile_derivative(x[0]);
      return g;
    case KernelFamily::LipschitzTable: {
      // Derivative of the interpolant, taken as a symmetric difference.
      const double d = 1e-6;
      for (int a = 0; a < k.dim; ++a) {
        Point xp = x, xm = x;
        xp[a] += d;
        xm[a] -= d;
        g[a] = (eval_kernel(k, xp) - eval_kernel(k, xm)) / (2 * d);
      }
      return g;
    }
    default: break;
  }
  const double beta = k.singular_order();
  if (beta == 0.0) return g;
  const double r = radius(x, k.dim);
  if (r == 0.0) throw DomainError("kernel gradient evaluated at its singularity");
  const double c = -kernel_sign(k) * k.strength * beta * std::pow(r, -beta - 2.0);
  for (int a = 0; a < k.dim; ++a) g[a] = c * x[a];
  return g;
}

double lattice_origin_constant(int dim, double beta) {
  static std::mutex m;
  static std::map<std::pair<int, double>, double> cache;
  {
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find({dim, beta});
    if (it != cache.end()) return it->second;
  }
  // Fit against Gaussians exp(-|y|²/2s²) of growing width, then Richardson in 1/s².
  auto defect = [&](double s) {
    const double sphere = 2.0 * std::pow(M_PI, 0.5 * dim) / std::tgamma(0.5 * dim);
    const double exact =
        sphere * 0.5 * std::pow(2.0 * s * s, 0.5 * (dim - beta)) * std::tgamma(0.5 * (dim - beta));
    const int M = static_cast<int>(std::ceil(9.0 * s));
    // Sum over the nonnegative orthant with reflection multiplicities.
    double sum = 0.0;
    const int n1 = M, n2 = dim > 1 ? M : 0, n3 = dim > 2 ? M : 0;
    for (int i = 0; i <= n1; ++i)
      for (int j = 0; j <= n2; ++j)
        for (int l = 0; l <= n3; ++l) {
          if (i == 0 && j == 0 && l == 0) continue;
          const double r2 = double(i) * i + double(j) * j + double(l) * l;
          const double mult = (i ? 2.0 : 1.0) * (j ? 2.0 : 1.0) * (l ? 2.0 : 1.0);
          sum += mult * std::pow(r2, -0.5 * beta) * std::exp(-r2 / (2 * s * s));
        }
    return exact - sum;
  };
  const double c8 = defect(8.0), c16 = defect(16.0);
  const double c = (4.0 * c16 - c8) / 3.0;
  std::lock_guard<std::mutex> lock(m);
  cache[{dim, beta}] = c;
  return c;
}

std::size_t KernelTable::offset_index(const std::array<int, 3>& m) const {
  std::size_t flat = 0;
  for (int a = 0; a < grid.dim(); ++a) flat = flat * extent[a] + (m[a] + grid.nodes(a) - 1);
  return flat;
}

KernelTable KernelTable::reflected() const {
  KernelTable r = *this;
  const std::size_t n = values.size();
  for (std::size_t i = 0; i < n; ++i) {
    r.values[i] = values[n - 1 - i];
    for (std::size_t a = 0; a < gradient.size(); ++a) r.gradient[a][i] = -gradient[a][n - 1 - i];
  }
  return r;
}

KernelTable tabulate_kernel(const InteractionKernel& k, const SpatialGrid& grid) {
  if (k.dim != grid.dim()) throw DomainError("kernel and grid dimensions differ");
  const int d = grid.dim();
  KernelTable t;
  t.grid = grid;
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) {
    t.extent[a] = 2 * grid.nodes(a) - 1;
    total *= t.extent[a];
  }
  t.values.assign(total, 0.0);
  t.gradient.assign(d, Field(total, 0.0));
  t.identically_zero = k.family == KernelFamily::Zero || k.strength == 0.0;
  if (t.identically_zero) return t;
  const double beta = k.singular_order();
  if (beta > 0 && !grid.isotropic()) throw DomainError("singular kernels need equal spacing on every axis");
  for (std::size_t f = 0; f < total; ++f) {
    std::array<int, 3> m{0, 0, 0};
    std::size_t rem = f;
    for (int a = d - 1; a >= 0; --a) {
      m[a] = static_cast<int>(rem % t.extent[a]) - (grid.nodes(a) - 1);
      rem /= t.extent[a];
    }
    Point x{0, 0, 0};
    bool origin = true;
    for (int a = 0; a < d; ++a) {
      x[a] = m[a] * grid.spacing(a);
      origin = origin && m[a] == 0;
    }
    if (!origin) {
      t.values[f] = eval_kernel(k, x);
      const Point g = eval_kernel_gradient(k, x);
      for (int a = 0; a < d; ++a) t.gradient[a][f] = g[a];
      continue;
    }
    if (beta > 0) {
      const double h = grid.spacing(0);
      t.values[f] = kernel_sign(k) * k.strength * lattice_origin_constant(d, beta) * std::pow(h, -beta);
    } else {
      t.values[f] = eval_kernel(k, x);
    }
    // Origin derivative sample: cell average of ∂_a k over the origin cell.
    for (int a = 0; a < d; ++a) {
      if (beta > 0) continue;  // radial: averages to zero
      Point xp{0, 0, 0}, xm{0, 0, 0};
      xp[a] = 0.5 * grid.spacing(a);
      xm[a] = -0.5 * grid.spacing(a);
      t.gradient[a][f] = (eval_kernel(k, xp) - eval_kernel(k, xm)) / grid.spacing(a);
    }
  }
  return t;
}

KernelSplit even_odd_split(const InteractionKernel& k, const SpatialGrid& grid) {
  if (!grid.symmetric_about_origin()) throw DomainError("even/odd split needs a grid symmetric about the origin");
  KernelTable t = tabulate_kernel(k, grid);
  KernelTable r = t.reflected();
  KernelSplit s{t, t, k};
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    s.even.values[i] = 0.5 * (t.values[i] + r.values[i]);
    s.odd.values[i] = 0.5 * (t.values[i] - r.values[i]);
    for (std::size_t a = 0; a < t.gradient.size(); ++a) {
      s.even.gradient[a][i] = 0.5 * (t.gradient[a][i] + r.gradient[a][i]);
      s.odd.gradient[a][i] = 0.5 * (t.gradient[a][i] - r.gradient[a][i]);
    }
  }
  auto all_zero = [](const Field& f) {
    return std::all_of(f.begin(), f.end(), [](double v) { return v == 0.0; });
  };
  s.even.identically_zero = all_zero(s.even.values);
  s.odd.identically_zero = all_zero(s.odd.values);
  return s;
}

namespace {

// Place lattice samples in wrap-around order on the doubled box.
Field wrap_table(const KernelTable& t, const Field& vals, const std::vector<int>& shape) {
  const int d = t.grid.dim();
  std::size_t total = 1;
  for (int n : shape) total *= n;
  Field out(total, 0.0);
  for (std::size_t f = 0; f < vals.size(); ++f) {
    std::size_t rem = f;
    std::array<int, 3> m{0, 0, 0};
    for (int a = d - 1; a >= 0; --a) {
      m[a] = static_cast<int>(rem % t.extent[a]) - (t.grid.nodes(a) - 1);
      rem /= t.extent[a];
    }
    std::size_t flat = 0;
    for (int a = 0; a < d; ++a) flat = flat * shape[a] + ((m[a] + shape[a]) % shape[a]);
    out[flat] = vals[f];
  }
  return out;
}

}  // namespace

Convolver::Convolver(const KernelTable& table) : grid_(table.grid), zero_(table.identically_zero) {
  if (zero_) return;
  const int d = grid_.dim();
  std::vector<int> shape(d);
  for (int a = 0; a < d; ++a) shape[a] = 2 * grid_.nodes(a);
  fft_ = std::make_shared<RealFft>(shape);
  const double vol = grid_.cell_volume();
  khat_ = fft_->forward(wrap_table(table, table.values, shape));
  for (auto& c : khat_) c *= vol;
  for (int a = 0; a < d; ++a) {
    ghat_.push_back(fft_->forward(wrap_table(table, table.gradient[a], shape)));
    for (auto& c : ghat_.back()) c *= vol;
  }
}

Field Convolver::run(const Spectrum& kh, const Field& rho, bool conj, double sign) const {
  const int d = grid_.dim();
  const auto& shape = fft_->shape();
  Field pad(fft_->real_size(), 0.0);
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    auto idx = grid_.unravel(i);
    std::size_t flat = 0;
    for (int a = 0; a < d; ++a) flat = flat * shape[a] + idx[a];
    pad[flat] = rho[i];
  }
  Spectrum s = fft_->forward(pad);
  for (std::size_t j = 0; j < s.size(); ++j) s[j] *= conj ? std::conj(kh[j]) : kh[j];
  Field full = fft_->inverse(s);
  const double scale = sign / static_cast<double>(fft_->real_size());
  Field out(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    auto idx = grid_.unravel(i);
    std::size_t flat = 0;
    for (int a = 0; a < d; ++a) flat = flat * shape[a] + idx[a];
    out[i] = full[flat] * scale;
  }
  return out;
}

Field Convolver::apply(const Field& rho, bool adjoint) const {
  if (rho.size() != grid_.size()) throw DomainError("density size does not match convolution grid");
  for (double v : rho)
    if (!std::isfinite(v)) throw NumericalError("non-finite density passed to convolution");
  if (zero_) return Field(grid_.size(), 0.0);
  return run(khat_, rho, adjoint, 1.0);
}

std::vector<Field> Convolver::gradient(const Field& rho, bool adjoint) const {
  if (rho.size() != grid_.size()) throw DomainError("density size does not match convolution grid");
  for (double v : rho)
    if (!std::isfinite(v)) throw NumericalError("non-finite density passed to convolution");
  std::vector<Field> out;
  for (int a = 0; a < grid_.dim(); ++a)
    out.push_back(zero_ ? Field(grid_.size(), 0.0) : run(ghat_[a], rho, adjoint, adjoint ? -1.0 : 1.0));
  return out;
}

Field convolve(const InteractionKernel& k, const DensityField& rho, bool adjoint) {
  return Convolver(tabulate_kernel(k, rho.grid())).apply(rho.values(), adjoint);
}

std::vector<Field> grad_convolve(const InteractionKernel& k, const DensityField& rho, bool adjoint) {
  return Convolver(tabulate_kernel(k, rho.grid())).gradient(rho.values(), adjoint);
}

namespace {

// Frequencies of the doubled box for a flattened r2c index.
std::array<double, 3> frequency(const SpatialGrid& g, const std::vector<int>& shape, std::size_t j) {
  const int d = g.dim();
  std::array<double, 3> xi{0, 0, 0};
  const int last = shape[d - 1] / 2 + 1;
  std::size_t rem = j;
  for (int a = d - 1; a >= 0; --a) {
    const int n = a == d - 1 ? last : shape[a];
    int i = static_cast<int>(rem % n);
    rem /= n;
    if (i > shape[a] / 2) i -= shape[a];
    xi[a] = 2.0 * M_PI * i / (shape[a] * g.spacing(a));
  }
  return xi;
}

}  // namespace

CoercivityEstimate coercivity_estimate(const InteractionKernel& k, const SpatialGrid& grid,
                                       double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta must lie in [0, 1]");
  CoercivityEstimate est;
  est.theta = theta;
  if (k.family == KernelFamily::Zero || k.strength == 0.0) return est;
  const KernelSplit split = even_odd_split(k, grid);
  const Convolver ce(split.even), co(split.odd);
  const int d = grid.dim();
  std::vector<int> shape(d);
  for (int a = 0; a < d; ++a) shape[a] = 2 * grid.nodes(a);
  const std::size_t nc = ce.is_zero() ? 0 : ce.multiplier().size();
  // Duplicate weights for the half-spectrum of the last axis.
  auto weight = [&](std::size_t j) {
    const int last = shape[d - 1] / 2 + 1;
    const int i = static_cast<int>(j % last);
    return (i == 0 || (shape[d - 1] % 2 == 0 && i == shape[d - 1] / 2)) ? 1.0 : 2.0;
  };
  double dxi = 1.0;  // dξ/(2π) per axis
  for (int a = 0; a < d; ++a) dxi *= 1.0 / (shape[a] * grid.spacing(a));

  const bool analytic = k.family == KernelFamily::Coulomb || k.family == KernelFamily::Newton ||
                        k.family == KernelFamily::Riesz;
  const double r = theta == 1.0 ? INFINITY : 1.0 / (1.0 - theta);
  double acc = 0.0, mx = 0.0;
  for (std::size_t j = 1; j < nc; ++j) {
    double kh;
    if (analytic) {
      if (k.family != KernelFamily::Newton) break;  // nonnegative transform
      const auto xi = frequency(grid, shape, j);
      const double xn = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
      const double c = std::pow(M_PI, 0.5 * d) * std::pow(2.0, k.alpha) * std::tgamma(0.5 * k.alpha) /
                       std::tgamma(0.5 * (d - k.alpha));
      kh = -k.strength * c * std::pow(xn, -k.alpha);
    } else {
      kh = ce.multiplier()[j].real();
    }
    const double neg = std::max(0.0, -kh);
    if (neg == 0.0) continue;
    mx = std::max(mx, neg);
    if (!std::isinf(r)) acc += weight(j) * std::pow(neg, r) * dxi;
  }
  const double norm = std::isinf(r) ? mx : std::pow(acc, 1.0 / r);
  auto xlogx = [](double t) { return t > 0 ? std::pow(t, -t) : 1.0; };
  const double C = xlogx(theta) * xlogx(1.0 - theta);
  est.kappa_lower_even = C * norm;

  auto surrogate = [&](const Convolver& c) {
    if (c.is_zero()) return 0.0;
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t j = 0; j < c.multiplier().size(); ++j) {
      const auto xi = frequency(grid, shape, j);
      const double xn = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
      const double a = std::abs(c.multiplier()[j]);
      s0 = std::max(s0, a);
      s1 = std::max(s1, xn * a);
    }
    return s0 + s1;
  };
  est.kappa_upper_even = surrogate(ce);
  est.kappa_upper_odd = surrogate(co);
  return est;
}

PositivityReport verify_positivity(const InteractionKernel& k, const SpatialGrid& grid, int trials,
                                   unsigned long long seed) {
  PositivityReport rep;
  const KernelTable t = tabulate_kernel(k, grid);
  const Convolver conv(t);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  rep.min_ratio = INFINITY;
  for (int tr = 0; tr < trials; ++tr) {
    Field rho(grid.size());
    // Sparse random bumps so that singular negative kernels are exposed.
    for (auto& v : rho) v = u(rng) < 0.2 ? u(rng) : 0.0;
    const double l1 = norm_lp(grid, rho, 1.0);
    if (l1 == 0.0) continue;
    const Field psi = conv.apply(rho);
    const double mn = *std::min_element(psi.begin(), psi.end());
    rep.min_ratio = std::min(rep.min_ratio, mn / l1);
  }
  if (std::isinf(rep.min_ratio)) rep.min_ratio = 0.0;
  rep.passed = rep.min_ratio >= -1e-10;
  if (k.family == KernelFamily::Newton && k.strength > 0) {
    rep.shift_constant = INFINITY;
  } else {
    const double mn = t.values.empty() ? 0.0 : *std::min_element(t.values.begin(), t.values.end());
    rep.shift_constant = std::max(0.0, -mn);
  }
  return rep;
}

InteractionKernel read_kernel_table(const std::string& path, int dim, double strength) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open kernel table '" + path + "'");
  std::vector<double> xs, ks;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x, v;
    if (!(ls >> x >> v)) {
      if (xs.empty()) continue;  // header row
      throw IoError("malformed row in kernel table '" + path + "'");
    }
    xs.push_back(x);
    ks.push_back(v);
  }
  return InteractionKernel::lipschitz_table(std::move(xs), std::move(ks), dim, strength);
}

}  // namespace vfpk
