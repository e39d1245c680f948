#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace vfpk {

struct PotentialBlock {
  std::string family = "Quadratic";
  double alpha = 2.0;
  std::string table;  // CSV of samples on the run grid (Tabulated)
  bool operator==(const PotentialBlock&) const = default;
};

struct KernelBlock {
  std::string family = "Zero";
  double strength = 0.0;
  double alpha = 0.0;
  std::string table;  // two-column CSV (LipschitzTable)
  bool operator==(const KernelBlock&) const = default;
};

struct GridBlock {
  int dim = 1;
  double half_width = 8.0;
  int n_x = 256;
  bool operator==(const GridBlock&) const = default;
};

struct VelocityBlock {
  int n_v = 32;
  double nu = 1.0;
  bool operator==(const VelocityBlock&) const = default;
};

struct EvolveBlock {
  double dt = 1e-3;
  double t_end = 1.0;
  double cfl_guard = 0.9;
  bool filter = false;
  int output_stride = 10;
  std::string limiter = "none";
  std::string boundary = "Outflow";
  bool operator==(const EvolveBlock&) const = default;
};

struct SteadyBlock {
  double tol = 1e-12;
  int max_iter = 500;
  double omega = 0.0;
  bool allow_nonpositive = false;
  std::string load;  // VFPK-RHO1 snapshot used instead of solving
  bool operator==(const SteadyBlock&) const = default;
};

struct PerturbBlock {
  std::string mode = "none";  // none | bump | rough | shifted_gaussian
  double amplitude = 0.0;
  double center = 0.0;
  double width = 1.0;
  double velocity_shift = 0.0;
  bool operator==(const PerturbBlock&) const = default;
};

struct ExperimentBlock {
  std::vector<double> hs;
  bool weighted = false;
  double fit_from = 0.0;
  double fit_to = 0.0;
  double e0_eps = 0.1;
  bool functionals = true;
  int trials = 100;
  std::string source = "none";  // none | manufactured (linear subcommand)
  double source_amplitude = 0.0;
  bool operator==(const ExperimentBlock&) const = default;
};

struct RunConfig {
  PotentialBlock potential;
  KernelBlock kernel;
  GridBlock grid;
  VelocityBlock velocity;
  EvolveBlock evolve;
  SteadyBlock steady;
  PerturbBlock perturb;
  ExperimentBlock experiment;
  // Sweep axes: dotted key -> list of values (kept as text).
  std::vector<std::pair<std::string, std::vector<std::string>>> sweep;
  long long seed = 1;
  std::string output_dir = "out";
  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

// Sets one dotted key from text; ConfigError names the path on failure.
void set_config_value(RunConfig& cfg, const std::string& path, const std::string& value);

// Checks family names and numeric ranges.
void validate_config(const RunConfig& cfg);

// Cartesian product of the sweep axes (duplicates removed), each point a list
// of (path, value) assignments. Returns the removed duplicates in `warnings`.
std::vector<std::vector<std::pair<std::string, std::string>>> sweep_points(
    const RunConfig& cfg, std::vector<std::string>* warnings = nullptr);

}  // namespace vfpk
