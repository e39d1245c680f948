#pragma once

#include <iosfwd>
#include <string>

#include "vfpk/grid.hpp"
#include "vfpk/hermite.hpp"

namespace vfpk {

// "VFPK-RHO1": dimension, node counts, box half-widths, then ρ★ and V★.
struct DensitySnapshot {
  SpatialGrid grid;
  Field rho;
  Field v_star;
};

// "VFPK-PSS1": N_v, N_x, box half-width, time, ν, then coefficients.
struct StateSnapshot {
  PhaseSpaceState state;
  double nu = 0.0;
};

void write_density_snapshot(std::ostream& os, const DensitySnapshot& s);
void write_density_snapshot(const std::string& path, const DensitySnapshot& s);
DensitySnapshot read_density_snapshot(std::istream& is);
DensitySnapshot read_density_snapshot(const std::string& path);

void write_state_snapshot(std::ostream& os, const PhaseSpaceState& s, double nu);
void write_state_snapshot(const std::string& path, const PhaseSpaceState& s, double nu);
StateSnapshot read_state_snapshot(std::istream& is);
StateSnapshot read_state_snapshot(const std::string& path);

}  // namespace vfpk
