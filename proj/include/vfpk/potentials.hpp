#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vfpk/grid.hpp"

namespace vfpk {

enum class PotentialFamily { Quadratic, PowerGrowth, LogPower, Tabulated };

std::string to_string(PotentialFamily f);
PotentialFamily potential_family_from_string(const std::string& s);

struct ConfinementPotential {
  PotentialFamily family = PotentialFamily::Quadratic;
  double alpha = 1.0;
  double additive_constant = 0.0;
  int dim = 1;
  // Tabulated family only.
  SpatialGrid table_grid;
  Field table;

  static ConfinementPotential quadratic(int dim);
  static ConfinementPotential power_growth(double alpha, int dim);
  static ConfinementPotential log_power(double alpha, int dim);
  static ConfinementPotential tabulated(SpatialGrid grid, Field samples);
};

struct PotentialValue {
  double value = 0.0;
  Point gradient{0, 0, 0};
  double hessian_norm = 0.0;
};

PotentialValue eval_potential(const ConfinementPotential& p, const Point& x);

// Values, gradients (axis-major: grad[a][node]) and Hessian norms on every node.
struct PotentialSamples {
  Field value;
  std::vector<Field> gradient;
  Field hessian_norm;
};
PotentialSamples sample_potential(const ConfinementPotential& p, const SpatialGrid& grid);

ConfinementPotential normalize(const ConfinementPotential& p, const SpatialGrid& grid);

struct AssumptionReportV {
  double r_v = 0.0;
  std::vector<std::pair<double, double>> smoothness_pairs;
  double poincare_constant = 0.0;
  double mass_defect = 0.0;
};

AssumptionReportV verify_assumption_confinement(const ConfinementPotential& p,
                                                const SpatialGrid& grid,
                                                const std::vector<double>& eps_list);

}  // namespace vfpk
