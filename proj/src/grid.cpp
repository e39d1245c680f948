#include "vfpk/grid.hpp"

#include <cmath>
#include <limits>

#include "vfpk/errors.hpp"

namespace vfpk {

SpatialGrid::SpatialGrid(int dim, std::vector<int> nodes, std::vector<double> half_widths,
                         std::vector<double> center)
    : dim_(dim), nodes_(std::move(nodes)), half_widths_(std::move(half_widths)),
      center_(std::move(center)) {
  if (dim_ < 1 || dim_ > 3) throw DomainError("grid dimension must be 1, 2 or 3");
  if (nodes_.size() == 1 && dim_ > 1) nodes_.assign(dim_, nodes_[0]);
  if (half_widths_.size() == 1 && dim_ > 1) half_widths_.assign(dim_, half_widths_[0]);
  if (center_.empty()) center_.assign(dim_, 0.0);
  if (static_cast<int>(nodes_.size()) != dim_ || static_cast<int>(half_widths_.size()) != dim_ ||
      static_cast<int>(center_.size()) != dim_)
    throw DomainError("grid axis metadata does not match dimension");
  size_ = 1;
  for (int a = 0; a < dim_; ++a) {
    if (nodes_[a] < 2) throw DomainError("grid needs at least two nodes per axis");
    if (!(half_widths_[a] > 0.0)) throw DomainError("grid half-width must be positive");
    size_ *= static_cast<std::size_t>(nodes_[a]);
  }
}

SpatialGrid SpatialGrid::uniform(int dim, int nodes, double half_width) {
  return SpatialGrid(dim, std::vector<int>(dim, nodes), std::vector<double>(dim, half_width));
}

double SpatialGrid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= spacing(a);
  return v;
}

double SpatialGrid::coord(int axis, int i) const {
  return center_[axis] - half_widths_[axis] + (i + 0.5) * spacing(axis);
}

std::size_t SpatialGrid::stride(int axis) const {
  std::size_t s = 1;
  for (int a = dim_ - 1; a > axis; --a) s *= static_cast<std::size_t>(nodes_[a]);
  return s;
}

std::array<int, 3> SpatialGrid::unravel(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % nodes_[a]);
    flat /= nodes_[a];
  }
  return idx;
}

std::size_t SpatialGrid::ravel(const std::array<int, 3>& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat = flat * nodes_[a] + idx[a];
  return flat;
}

Point SpatialGrid::point(std::size_t flat) const {
  auto idx = unravel(flat);
  Point p{0, 0, 0};
  for (int a = 0; a < dim_; ++a) p[a] = coord(a, idx[a]);
  return p;
}

bool SpatialGrid::isotropic() const {
  for (int a = 1; a < dim_; ++a)
    if (std::abs(spacing(a) - spacing(0)) > 1e-12 * spacing(0)) return false;
  return true;
}

bool SpatialGrid::symmetric_about_origin(double tol) const {
  for (int a = 0; a < dim_; ++a)
    if (std::abs(center_[a]) > tol * half_widths_[a]) return false;
  return true;
}

bool SpatialGrid::same_as(const SpatialGrid& o, double tol) const {
  if (dim_ != o.dim_ || nodes_ != o.nodes_) return false;
  for (int a = 0; a < dim_; ++a) {
    if (std::abs(half_widths_[a] - o.half_widths_[a]) > tol * half_widths_[a]) return false;
    if (std::abs(center_[a] - o.center_[a]) > tol * half_widths_[a]) return false;
  }
  return true;
}

double SpatialGrid::integrate(const Field& f) const {
  double s = 0.0;
  for (double x : f) s += x;
  return s * cell_volume();
}

double SpatialGrid::boundary_max_abs(const Field& f) const {
  double m = 0.0;
  for (std::size_t k = 0; k < size_; ++k) {
    auto idx = unravel(k);
    bool edge = false;
    for (int a = 0; a < dim_; ++a) edge = edge || idx[a] == 0 || idx[a] == nodes_[a] - 1;
    if (edge) m = std::max(m, std::abs(f[k]));
  }
  return m;
}

DensityField::DensityField(SpatialGrid grid, Field values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw DomainError("density size does not match grid");
  mass_ = grid_.integrate(values_);
}

double norm_lp(const SpatialGrid& g, const Field& f, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : f) m = std::max(m, std::abs(x));
    return m;
  }
  double s = 0.0;
  for (double x : f) s += std::pow(std::abs(x), p);
  return std::pow(s * g.cell_volume(), 1.0 / p);
}

double dot(const SpatialGrid& g, const Field& a, const Field& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * g.cell_volume();
}

}  // namespace vfpk
