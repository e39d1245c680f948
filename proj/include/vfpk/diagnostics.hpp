#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vfpk/hermite.hpp"
#include "vfpk/kernels.hpp"
#include "vfpk/linear.hpp"

namespace vfpk {

const std::vector<std::string>& standard_columns();

// Rectangular table of time-stamped diagnostics; NaN entries are blank in CSV.
struct DiagnosticSeries {
  std::vector<std::string> columns = standard_columns();
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 if absent
  int ensure_column(const std::string& name);
  std::vector<double> values(const std::string& name) const;
  void set(std::size_t row, const std::string& name, double v);
  void append(const std::map<std::string, double>& entries);

  void write_csv(std::ostream& os) const;
  void write_csv(const std::string& path) const;
  static DiagnosticSeries read_csv(std::istream& is);
};

struct FreeEnergyParts {
  double energy = 0.0;
  double dissipation = 0.0;  // ν ∫ F |∂_v log(F/M)|²
  double odd_work = 0.0;     // ∫ ∂_x ψ^o · ∫ v F dv dx
};

// Quadrature of the kinetic free energy for a nonlinear 1D state. V holds the
// normalized potential samples; the kernel split supplies K^e and K^o.
class FreeEnergyEvaluator {
 public:
  FreeEnergyEvaluator(const SpatialGrid& grid, int n_modes, Field V, const KernelSplit& split, double nu);
  FreeEnergyParts evaluate(const PhaseSpaceState& s) const;

 private:
  int n_modes_;
  Field V_;
  Convolver even_, odd_;
  double nu_;
  Eigen::MatrixXd H_;   // H_n at Gauss–Hermite nodes
  Eigen::VectorXd wq_;  // weights
};

double kinetic_free_energy(const PhaseSpaceState& s, const Field& V, const KernelSplit& split);

// Mean over consecutive rows of |ΔE/Δt + dissipation + odd_work| (left endpoint).
double dissipation_residual(const DiagnosticSeries& series);

struct NormOptions {
  std::vector<double> hs_list;
  double e0_eps = 0.1;
  E11Parameters e11 = default_e11_parameters();
  bool with_functionals = true;
};

struct NormRecord {
  double t = 0.0;
  double l2 = 0.0;
  double h1x = 0.0;
  double gradx = 0.0;
  double gradv = 0.0;
  std::map<double, double> hsx;
  double twisted = 0.0;  // NaN when the Gram form is negative
  double e0 = NAN;
  double e11 = NAN;
  std::map<int, double> weighted;
};

NormRecord compute_norms(const LinearStructure& ls, const Coeffs& u, double t,
                         const NormOptions& opt = {});

double twisted_norm(const LinearStructure& ls, const Coeffs& u);
double e0_functional(const LinearStructure& ls, const Coeffs& u, double eps);
double e11_functional(const LinearStructure& ls, const Coeffs& u, double eps, double a, double b,
                      double c);
// Time-weighted functional E_0 + a t‖∇_v f‖² + b t²⟨∇_v f, ∇_x f⟩ + c t³‖∇_x f‖², t capped at 1.
double g_functional(const LinearStructure& ls, const Coeffs& u, double t, double eps, double a,
                    double b, double c);
// w_σ(t) = e^{λt} min(1, t)^{σ/2}.
double time_weight(double sigma, double lambda, double t);

enum class FitKind { Exponential, Power };

struct RateFit {
  double lambda_hat = NAN;
  double exponent_hat = NAN;
  std::pair<double, double> window{0.0, 0.0};
  double r_squared = NAN;
  int samples = 0;
};

RateFit fit_rates(const DiagnosticSeries& series, const std::string& column,
                  std::pair<double, double> window, FitKind kind);
RateFit fit_rates(const std::vector<double>& t, const std::vector<double>& y,
                  std::pair<double, double> window, FitKind kind);

double critical_smoothness(int d, double q);

// Dense matrices in u-coordinates; adjoints are taken in the Gram geometry.
struct DenseOperatorBundle {
  Eigen::MatrixXd Lambda, T, L, Pi, A, G;
  int n_x = 0, n_v = 0;
  bool gram_positive = false;
  Eigen::VectorXd mean_functional;  // u ↦ ∫ f F★ is u ↦ meanᵀ u
};

DenseOperatorBundle assemble_discrete_operators(const LinearStructure& ls);
// G^{-1} Xᵀ G.
Eigen::MatrixXd gram_adjoint(const DenseOperatorBundle& b, const Eigen::MatrixXd& X);
// Operator norm of X measured in the Gram geometry.
double gram_operator_norm(const DenseOperatorBundle& b, const Eigen::MatrixXd& X);
double gram_norm(const DenseOperatorBundle& b, const Eigen::VectorXd& x);

struct OperatorIdentityReport {
  double t_skew = NAN;      // ‖T + T†‖
  double l_sym = NAN;       // ‖L - L†‖
  double pi_t_pi = NAN;     // ‖ΠTΠ‖
  double max_a = 0.0;       // max |||Af||| / |||f|||
  double max_al = 0.0;      // max |||ALf||| / |||f|||
  double max_ta = 0.0;      // max |||TAf||| / |||f|||
  int a_violations = 0;
  int trials = 0;
  double lambda_m = NAN;
  bool gram_positive = false;
  std::string to_json() const;
};

double macroscopic_coercivity_constant(const DenseOperatorBundle& b);
OperatorIdentityReport verify_operator_identities(const DenseOperatorBundle& b, double nu, int trials,
                                                  unsigned long long seed = 1);

}  // namespace vfpk
