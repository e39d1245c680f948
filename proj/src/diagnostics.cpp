#include "vfpk/diagnostics.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "vfpk/errors.hpp"

namespace vfpk {

const std::vector<std::string>& standard_columns() {
  static const std::vector<std::string> cols{"t",         "mass",     "free_energy",
                                             "l2_fstar",  "h1x_fstar", "gradv_l2",
                                             "twisted",   "e0",       "e11"};
  return cols;
}

int DiagnosticSeries::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

int DiagnosticSeries::ensure_column(const std::string& name) {
  int c = column(name);
  if (c >= 0) return c;
  columns.push_back(name);
  for (auto& r : rows) r.push_back(NAN);
  return static_cast<int>(columns.size()) - 1;
}

std::vector<double> DiagnosticSeries::values(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw DomainError("series has no column '" + name + "'");
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

void DiagnosticSeries::set(std::size_t row, const std::string& name, double v) {
  const int c = ensure_column(name);
  rows.at(row)[c] = v;
}

void DiagnosticSeries::append(const std::map<std::string, double>& entries) {
  for (const auto& [k, v] : entries) ensure_column(k);
  std::vector<double> r(columns.size(), NAN);
  for (const auto& [k, v] : entries) r[column(k)] = v;
  rows.push_back(std::move(r));
}

void DiagnosticSeries::write_csv(std::ostream& os) const {
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  os << std::setprecision(17);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) os << ',';
      if (std::isfinite(r[i])) os << r[i];
    }
    os << '\n';
  }
}

void DiagnosticSeries::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write '" + path + "'");
  write_csv(os);
}

DiagnosticSeries DiagnosticSeries::read_csv(std::istream& is) {
  DiagnosticSeries s;
  s.columns.clear();
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty CSV");
  {
    std::stringstream ss(line);
    std::string name;
    while (std::getline(ss, name, ',')) s.columns.push_back(name);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> r;
    std::size_t pos = 0;
    while (true) {
      const std::size_t next = line.find(',', pos);
      const std::string cell = line.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
      r.push_back(cell.empty() ? NAN : std::stod(cell));
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    r.resize(s.columns.size(), NAN);
    s.rows.push_back(std::move(r));
  }
  return s;
}

FreeEnergyEvaluator::FreeEnergyEvaluator(const SpatialGrid& grid, int n_modes, Field V,
                                         const KernelSplit& split, double nu)
    : n_modes_(n_modes), V_(std::move(V)), nu_(nu) {
  (void)grid;
  even_ = Convolver(split.even);
  odd_ = Convolver(split.odd);
  const GaussHermite q = HermiteBasis::quadrature(3 * n_modes + 16);
  HermiteBasis b(n_modes);
  H_ = b.polynomials(q.nodes);
  wq_ = Eigen::Map<const Eigen::VectorXd>(q.weights.data(), q.weights.size());
}

FreeEnergyParts FreeEnergyEvaluator::evaluate(const PhaseSpaceState& s) const {
  constexpr double floor = 1e-300;
  const int nx = s.n_x();
  const double h = s.grid.cell_volume();
  const Coeffs& C = s.coeffs;
  Coeffs Cp = Coeffs::Zero(n_modes_, nx);
  for (int n = 0; n + 1 < n_modes_; ++n) Cp.row(n) = std::sqrt(n + 1.0) * C.row(n + 1);
  const Eigen::MatrixXd g = H_.transpose() * C;
  const Eigen::MatrixXd gp = H_.transpose() * Cp;
  FreeEnergyParts out;
  double ent = 0.0, dis = 0.0, mass = 0.0, pot = 0.0;
  Field rho(nx);
  for (int i = 0; i < nx; ++i) {
    rho[i] = C(0, i);
    mass += rho[i];
    pot += rho[i] * V_[i];
    for (int q = 0; q < g.rows(); ++q) {
      const double gv = g(q, i);
      if (gv > floor) {
        ent += wq_[q] * gv * std::log(gv);
        dis += wq_[q] * gp(q, i) * gp(q, i) / gv;
      }
    }
  }
  if (mass < 0) throw DomainError("free energy of a negative-mass state");
  double inter = 0.0, work = 0.0;
  if (!even_.is_zero()) {
    const Field psi = even_.apply(rho);
    for (int i = 0; i < nx; ++i) inter += rho[i] * psi[i];
  }
  if (!odd_.is_zero()) {
    const Field dpsi = odd_.gradient(rho)[0];
    for (int i = 0; i < nx; ++i) work += dpsi[i] * C(1, i);
  }
  out.energy = h * (ent - 0.5 * std::log(2.0 * M_PI) * mass + pot + 0.5 * inter);
  out.dissipation = nu_ * h * dis;
  out.odd_work = h * work;
  return out;
}

double kinetic_free_energy(const PhaseSpaceState& s, const Field& V, const KernelSplit& split) {
  return FreeEnergyEvaluator(s.grid, s.n_modes(), V, split, 1.0).evaluate(s).energy;
}

double dissipation_residual(const DiagnosticSeries& series) {
  const auto t = series.values("t");
  const auto e = series.values("free_energy");
  const auto d = series.values("dissipation");
  const auto w = series.values("odd_work");
  double acc = 0.0;
  int n = 0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double dt = t[k + 1] - t[k];
    if (!(dt > 0)) continue;
    const double r = (e[k + 1] - e[k]) / dt + d[k] + (std::isfinite(w[k]) ? w[k] : 0.0);
    if (!std::isfinite(r)) continue;
    acc += std::abs(r);
    ++n;
  }
  if (n == 0) throw DomainError("series too short for a dissipation residual");
  return acc / n;
}

NormRecord compute_norms(const LinearStructure& ls, const Coeffs& u, double t, const NormOptions& opt) {
  NormRecord r;
  r.t = t;
  const double l2 = ls.l2_sq(u), gx = ls.gradx_sq(u), gv = ls.gradv_sq(u);
  r.l2 = std::sqrt(l2);
  r.gradx = std::sqrt(gx);
  r.gradv = std::sqrt(gv);
  r.h1x = std::sqrt(l2 + gx);
  for (double s : opt.hs_list) r.hsx[s] = ls.hs_norm(u, s);
  const double tw = ls.twisted_sq(u);
  r.twisted = tw >= 0 ? std::sqrt(tw) : NAN;
  if (opt.with_functionals) {
    r.e0 = ls.e0(u, opt.e0_eps);
    r.e11 = r.e0 + opt.e11.a * gv + opt.e11.b * ls.cross_vx(u) + opt.e11.c * gx;
  }
  return r;
}

double twisted_norm(const LinearStructure& ls, const Coeffs& u) {
  const double tw = ls.twisted_sq(u);
  return tw >= 0 ? std::sqrt(tw) : NAN;
}

double e0_functional(const LinearStructure& ls, const Coeffs& u, double eps) {
  if (!(eps > 0 && eps <= 0.5)) throw DomainError("E_0 parameter must lie in (0, 1/2]");
  return ls.e0(u, eps);
}

double e11_functional(const LinearStructure& ls, const Coeffs& u, double eps, double a, double b,
                      double c) {
  if (b * b > a * c) throw DomainError("E_11 parameters need b² <= ac");
  return ls.e11(u, eps, a, b, c);
}

double g_functional(const LinearStructure& ls, const Coeffs& u, double t, double eps, double a,
                    double b, double c) {
  const double s = std::min(1.0, t);
  return ls.e0(u, eps) + a * s * ls.gradv_sq(u) + b * s * s * ls.cross_vx(u) +
         c * s * s * s * ls.gradx_sq(u);
}

double time_weight(double sigma, double lambda, double t) {
  return std::exp(lambda * t) * std::pow(std::min(1.0, t), 0.5 * sigma);
}

RateFit fit_rates(const std::vector<double>& t, const std::vector<double>& y,
                  std::pair<double, double> window, FitKind kind) {
  std::vector<double> X, Y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window.first || t[i] > window.second || !std::isfinite(y[i])) continue;
    if (!(y[i] > 0)) throw DomainError("rate fit needs positive samples");
    if (kind == FitKind::Power && !(t[i] > 0)) throw DomainError("power fit needs t > 0");
    X.push_back(kind == FitKind::Power ? std::log(t[i]) : t[i]);
    Y.push_back(std::log(y[i]));
  }
  if (X.size() < 10) throw DomainError("rate fit needs at least 10 samples in the window");
  const double n = X.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    mx += X[i];
    my += Y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    sxx += (X[i] - mx) * (X[i] - mx);
    sxy += (X[i] - mx) * (Y[i] - my);
    syy += (Y[i] - my) * (Y[i] - my);
  }
  const double slope = sxy / sxx;
  RateFit f;
  f.window = window;
  f.samples = static_cast<int>(X.size());
  const double ssres = syy - slope * sxy;
  f.r_squared = syy > 0 ? std::clamp(1.0 - ssres / syy, 0.0, 1.0) : 1.0;
  if (kind == FitKind::Exponential) f.lambda_hat = -slope;
  else f.exponent_hat = slope;
  return f;
}

RateFit fit_rates(const DiagnosticSeries& series, const std::string& column,
                  std::pair<double, double> window, FitKind kind) {
  return fit_rates(series.values("t"), series.values(column), window, kind);
}

double critical_smoothness(int d, double q) {
  if (d < 1 || !(q >= 2)) throw DomainError("critical smoothness needs d >= 1 and q >= 2");
  return std::max(0.0, 1.5 * (d / q - 1.0 / 3.0));
}

namespace {

Coeffs unflatten(const Eigen::VectorXd& x, int nv, int nx) {
  Coeffs c(nv, nx);
  for (int n = 0; n < nv; ++n)
    for (int i = 0; i < nx; ++i) c(n, i) = x[n * nx + i];
  return c;
}

Eigen::VectorXd flatten(const Coeffs& c) {
  Eigen::VectorXd x(c.size());
  for (int n = 0; n < c.rows(); ++n)
    for (int i = 0; i < c.cols(); ++i) x[n * c.cols() + i] = c(n, i);
  return x;
}

}  // namespace

DenseOperatorBundle assemble_discrete_operators(const LinearStructure& ls) {
  const int nv = ls.n_v(), nx = ls.n_x();
  const int n = nv * nx;
  if (n > 8192) throw DomainError("dense assembly limited to N_x·N_v <= 8192");
  DenseOperatorBundle b;
  b.n_x = nx;
  b.n_v = nv;
  b.T.resize(n, n);
  b.L.resize(n, n);
  b.G.resize(n, n);
  Eigen::MatrixXd Tint = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[j] = 1.0;
    const Coeffs ej = unflatten(e, nv, nx);
    b.T.col(j) = flatten(ls.apply_T(ej));
    b.L.col(j) = flatten(ls.apply_L(ej));
    Eigen::VectorXd gcol(n);
    for (int k = 0; k < n; ++k) gcol[k] = (k == j) ? ls.h() : 0.0;
    if (j < nx && ls.has_interaction()) {
      Field e0(nx, 0.0);
      e0[j] = 1.0;
      const Field psi = ls.psi_even(e0);
      Field sp(nx);
      for (int i = 0; i < nx; ++i) {
        gcol[i] += ls.h() * ls.sqrt_rho()[i] * psi[i];
        sp[i] = ls.sqrt_rho()[i] * psi[i];
      }
      const Field d = ls.dx(sp);
      for (int i = 0; i < nx; ++i) Tint(nx + i, j) = d[i];
    }
    b.G.col(j) = gcol;
  }
  b.G = 0.5 * (b.G + b.G.transpose());
  b.Lambda = b.T - Tint - b.L;
  b.Pi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < nx; ++i) b.Pi(i, i) = 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(b.G);
  b.gram_positive = llt.info() == Eigen::Success;
  b.mean_functional = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < nx; ++i) b.mean_functional[i] = ls.h() * ls.sqrt_rho()[i];
  if (!b.gram_positive) return b;
  const Eigen::MatrixXd TPi = b.T * b.Pi;
  const Eigen::MatrixXd TPi_adj = gram_adjoint(b, TPi);
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n) + TPi_adj * TPi;
  b.A = M.partialPivLu().solve(TPi_adj);
  return b;
}

Eigen::MatrixXd gram_adjoint(const DenseOperatorBundle& b, const Eigen::MatrixXd& X) {
  Eigen::LLT<Eigen::MatrixXd> llt(b.G);
  if (llt.info() != Eigen::Success) throw NumericalError("Gram matrix is not positive definite");
  return llt.solve(X.transpose() * b.G);
}

double gram_operator_norm(const DenseOperatorBundle& b, const Eigen::MatrixXd& X) {
  Eigen::LLT<Eigen::MatrixXd> llt(b.G);
  if (llt.info() != Eigen::Success) throw NumericalError("Gram matrix is not positive definite");
  const Eigen::MatrixXd Lt = llt.matrixU();  // G = Ltᵀ Lt
  // ‖Lt X Lt^{-1}‖_2
  const Eigen::MatrixXd Y = Lt * X;
  const Eigen::MatrixXd Z = llt.matrixU().solve<Eigen::OnTheRight>(Y);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Z);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

double gram_norm(const DenseOperatorBundle& b, const Eigen::VectorXd& x) {
  return std::sqrt(std::max(0.0, x.dot(b.G * x)));
}

double macroscopic_coercivity_constant(const DenseOperatorBundle& b) {
  const int nx = b.n_x, n = b.n_x * b.n_v;
  // Orthonormal basis of macroscopic states with zero F★-mean.
  Eigen::VectorXd m = b.mean_functional.head(nx);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  const Eigen::MatrixXd Q = qr.householderQ();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, nx - 1);
  P.topRows(nx) = Q.rightCols(nx - 1);
  const Eigen::MatrixXd TP = b.T * b.Pi * P;
  const Eigen::MatrixXd num = TP.transpose() * b.G * TP;
  const Eigen::MatrixXd den = P.transpose() * b.G * P;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (num + num.transpose()),
                                                               0.5 * (den + den.transpose()),
                                                               Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()));
}

OperatorIdentityReport verify_operator_identities(const DenseOperatorBundle& b, double nu, int trials,
                                                  unsigned long long seed) {
  OperatorIdentityReport r;
  r.gram_positive = b.gram_positive;
  if (!b.gram_positive) return r;
  r.t_skew = gram_operator_norm(b, b.T + gram_adjoint(b, b.T));
  r.l_sym = gram_operator_norm(b, b.L - gram_adjoint(b, b.L));
  r.pi_t_pi = gram_operator_norm(b, b.Pi * b.T * b.Pi);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const int n = b.n_x * b.n_v;
  r.trials = trials;
  for (int k = 0; k < trials; ++k) {
    Eigen::VectorXd f(n);
    for (int i = 0; i < n; ++i) f[i] = nd(rng);
    const double nf = gram_norm(b, f);
    const double ra = gram_norm(b, b.A * f) / nf;
    const double ral = gram_norm(b, b.A * (b.L * f)) / nf;
    const double rta = gram_norm(b, b.T * (b.A * f)) / nf;
    r.max_a = std::max(r.max_a, ra);
    r.max_al = std::max(r.max_al, ral);
    r.max_ta = std::max(r.max_ta, rta);
    if (ra > 0.5 * (1 + 1e-10) || ral > 0.5 * nu * (1 + 1e-10) || rta > 1.0 + 1e-10) ++r.a_violations;
  }
  r.lambda_m = macroscopic_coercivity_constant(b);
  return r;
}

std::string OperatorIdentityReport::to_json() const {
  nlohmann::json j;
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  j["gram_positive_definite"] = gram_positive;
  j["t_plus_t_adjoint"] = num(t_skew);
  j["l_minus_l_adjoint"] = num(l_sym);
  j["pi_t_pi"] = num(pi_t_pi);
  j["max_ratio_A"] = max_a;
  j["max_ratio_AL"] = max_al;
  j["max_ratio_TA"] = max_ta;
  j["a_bound_violations"] = a_violations;
  j["trials"] = trials;
  j["lambda_M"] = num(lambda_m);
  return j.dump(2);
}

}  // namespace vfpk
