#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace vfpk {

using Field = std::vector<double>;
using Point = std::array<double, 3>;

// Cell-centred tensor grid on the box center + [-L, L]^d, row-major storage
// with the last axis fastest. Node i sits at center - L + (i + 1/2) h.
class SpatialGrid {
 public:
  SpatialGrid() = default;
  SpatialGrid(int dim, std::vector<int> nodes, std::vector<double> half_widths,
              std::vector<double> center = {});
  static SpatialGrid uniform(int dim, int nodes, double half_width);

  int dim() const { return dim_; }
  int nodes(int axis) const { return nodes_[axis]; }
  double half_width(int axis) const { return half_widths_[axis]; }
  double center(int axis) const { return center_[axis]; }
  double spacing(int axis) const { return 2.0 * half_widths_[axis] / nodes_[axis]; }
  const std::vector<int>& node_counts() const { return nodes_; }
  const std::vector<double>& half_widths() const { return half_widths_; }
  const std::vector<double>& centers() const { return center_; }

  std::size_t size() const { return size_; }
  double cell_volume() const;
  double coord(int axis, int i) const;
  Point point(std::size_t flat) const;
  std::array<int, 3> unravel(std::size_t flat) const;
  std::size_t ravel(const std::array<int, 3>& idx) const;
  std::size_t stride(int axis) const;

  // True when every axis has identical spacing (needed by radial singular kernels).
  bool isotropic() const;
  bool symmetric_about_origin(double tol = 1e-12) const;
  bool same_as(const SpatialGrid& other, double tol = 1e-12) const;

  // Quadrature of a field with the uniform cell weight.
  double integrate(const Field& f) const;
  // Maximum over all nodes touching the box boundary.
  double boundary_max_abs(const Field& f) const;

 private:
  int dim_ = 0;
  std::vector<int> nodes_;
  std::vector<double> half_widths_;
  std::vector<double> center_;
  std::size_t size_ = 0;
};

// Nonnegative density samples with the mass fixed at construction.
class DensityField {
 public:
  DensityField() = default;
  DensityField(SpatialGrid grid, Field values);

  const SpatialGrid& grid() const { return grid_; }
  const Field& values() const { return values_; }
  double mass() const { return mass_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

 private:
  SpatialGrid grid_;
  Field values_;
  double mass_ = 0.0;
};

double norm_lp(const SpatialGrid& g, const Field& f, double p);
double dot(const SpatialGrid& g, const Field& a, const Field& b);

}  // namespace vfpk
