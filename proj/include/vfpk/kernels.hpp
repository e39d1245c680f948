#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vfpk/fft.hpp"
#include "vfpk/grid.hpp"

namespace vfpk {

enum class KernelFamily { Zero, Coulomb, Newton, Riesz, Synchrotron, LipschitzTable };

std::string to_string(KernelFamily f);
KernelFamily kernel_family_from_string(const std::string& s);

struct LebesgueExponents {
  double p = INFINITY;  // K : L1 ∩ L2 -> L^p
  double q = INFINITY;  // ∇K : L1 ∩ L2 -> L^q
};

struct InteractionKernel {
  KernelFamily family = KernelFamily::Zero;
  double strength = 0.0;  // I
  double alpha = 2.0;     // Riesz order
  int dim = 1;
  // LipschitzTable: samples k(x) at increasing abscissae (radius when dim > 1).
  std::vector<double> table_x;
  std::vector<double> table_k;

  static InteractionKernel zero(int dim);
  static InteractionKernel coulomb(double strength, int dim);
  static InteractionKernel newton(double strength, int dim);
  static InteractionKernel riesz(double strength, double alpha, int dim);
  static InteractionKernel synchrotron(double strength);
  static InteractionKernel lipschitz_table(std::vector<double> x, std::vector<double> k, int dim,
                                           double strength = 1.0);
  static InteractionKernel constant(double c, int dim);

  bool singular() const;
  // Exponent β of the |x|^{-β} singularity (0 when bounded).
  double singular_order() const;
  LebesgueExponents lebesgue_exponents() const;
  bool theorem_applicable() const { return lebesgue_exponents().q > dim; }
};

double synchrotron_profile(double x);
double synchrotron_profile_derivative(double x);

double eval_kernel(const InteractionKernel& k, const Point& x);
Point eval_kernel_gradient(const InteractionKernel& k, const Point& x);

// Lattice constant c with sum_{m != 0} |m|^{-β} f(m) + c f(0) ≈ ∫ |y|^{-β} f(y) dy
// for smooth slowly varying f on Z^d.
double lattice_origin_constant(int dim, double beta);

// Kernel samples on the difference lattice m·h, m_a ∈ [-(N_a-1), N_a-1].
struct KernelTable {
  SpatialGrid grid;
  std::array<int, 3> extent{1, 1, 1};
  Field values;
  std::vector<Field> gradient;  // per axis
  bool identically_zero = false;

  std::size_t offset_index(const std::array<int, 3>& m) const;
  double at(const std::array<int, 3>& m) const { return values[offset_index(m)]; }
  KernelTable reflected() const;
};

KernelTable tabulate_kernel(const InteractionKernel& k, const SpatialGrid& grid);

struct KernelSplit {
  KernelTable even;
  KernelTable odd;
  InteractionKernel source;
};

KernelSplit even_odd_split(const InteractionKernel& k, const SpatialGrid& grid);

// Free-space convolution against a fixed kernel table using the doubled box.
class Convolver {
 public:
  Convolver() = default;
  explicit Convolver(const KernelTable& table);

  bool is_zero() const { return zero_; }
  const SpatialGrid& grid() const { return grid_; }
  Field apply(const Field& rho, bool adjoint = false) const;
  std::vector<Field> gradient(const Field& rho, bool adjoint = false) const;
  // Discrete multiplier of the kernel values (h^d · DFT) on the padded box.
  const Spectrum& multiplier() const { return khat_; }
  const RealFft& fft() const { return *fft_; }

 private:
  Field run(const Spectrum& kh, const Field& rho, bool conj, double sign) const;

  SpatialGrid grid_;
  bool zero_ = true;
  std::shared_ptr<RealFft> fft_;
  Spectrum khat_;
  std::vector<Spectrum> ghat_;
};

Field convolve(const InteractionKernel& k, const DensityField& rho, bool adjoint = false);
std::vector<Field> grad_convolve(const InteractionKernel& k, const DensityField& rho,
                                 bool adjoint = false);

struct CoercivityEstimate {
  double theta = 0.0;
  double kappa_lower_even = 0.0;
  double kappa_upper_even = 0.0;
  double kappa_upper_odd = 0.0;
};

CoercivityEstimate coercivity_estimate(const InteractionKernel& k, const SpatialGrid& grid,
                                       double theta);

struct PositivityReport {
  bool passed = true;
  double min_ratio = 0.0;       // min over trials of min(Kρ)/‖ρ‖_1
  double shift_constant = 0.0;  // most negative kernel value, sign flipped (+inf if unbounded)
};

PositivityReport verify_positivity(const InteractionKernel& k, const SpatialGrid& grid, int trials,
                                   unsigned long long seed = 1);

// Two-column CSV (x, k(x)) reader for LipschitzTable kernels.
InteractionKernel read_kernel_table(const std::string& path, int dim, double strength = 1.0);

}  // namespace vfpk
