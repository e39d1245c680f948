#include "vfpk/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "vfpk/errors.hpp"

namespace vfpk {
namespace {

constexpr char kRho[] = "VFPK-RHO1";
constexpr char kPss[] = "VFPK-PSS1";
constexpr std::size_t kMagic = 9;

template <class T>
T to_le(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_le(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError("truncated snapshot");
  return to_le(v);
}

void check_magic(std::istream& is, const char* magic) {
  char buf[kMagic];
  if (!is.read(buf, kMagic) || std::memcmp(buf, magic, kMagic) != 0)
    throw IoError(std::string("bad snapshot magic, expected ") + magic);
}

void require_centered(const SpatialGrid& g) {
  for (int a = 0; a < g.dim(); ++a)
    if (g.center(a) != 0.0) throw IoError("snapshots store origin-centered boxes only");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  return os;
}
std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path);
  return is;
}

}  // namespace

void write_density_snapshot(std::ostream& os, const DensitySnapshot& s) {
  require_centered(s.grid);
  if (s.rho.size() != s.grid.size() || s.v_star.size() != s.grid.size())
    throw IoError("snapshot fields do not match the grid");
  os.write(kRho, kMagic);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.grid.dim()));
  for (int a = 0; a < s.grid.dim(); ++a) put<std::uint32_t>(os, static_cast<std::uint32_t>(s.grid.nodes(a)));
  for (int a = 0; a < s.grid.dim(); ++a) put<double>(os, s.grid.half_width(a));
  for (double v : s.rho) put<double>(os, v);
  for (double v : s.v_star) put<double>(os, v);
  if (!os) throw IoError("snapshot write failed");
}

DensitySnapshot read_density_snapshot(std::istream& is) {
  check_magic(is, kRho);
  const auto dim = get<std::uint32_t>(is);
  if (dim < 1 || dim > 3) throw IoError("snapshot dimension out of range");
  std::vector<int> nodes(dim);
  std::vector<double> half(dim);
  for (auto& n : nodes) n = static_cast<int>(get<std::uint32_t>(is));
  for (auto& l : half) l = get<double>(is);
  DensitySnapshot s{SpatialGrid(static_cast<int>(dim), nodes, half), {}, {}};
  s.rho.resize(s.grid.size());
  s.v_star.resize(s.grid.size());
  for (auto& v : s.rho) v = get<double>(is);
  for (auto& v : s.v_star) v = get<double>(is);
  return s;
}

void write_state_snapshot(std::ostream& os, const PhaseSpaceState& s, double nu) {
  if (s.grid.dim() != 1) throw IoError("phase-space snapshots are one-dimensional");
  require_centered(s.grid);
  os.write(kPss, kMagic);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.n_modes()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.n_x()));
  put<double>(os, s.grid.half_width(0));
  put<double>(os, s.time);
  put<double>(os, nu);
  for (int n = 0; n < s.n_modes(); ++n)
    for (int i = 0; i < s.n_x(); ++i) put<double>(os, s.coeffs(n, i));
  if (!os) throw IoError("snapshot write failed");
}

StateSnapshot read_state_snapshot(std::istream& is) {
  check_magic(is, kPss);
  const int nv = static_cast<int>(get<std::uint32_t>(is));
  const int nx = static_cast<int>(get<std::uint32_t>(is));
  const double L = get<double>(is);
  StateSnapshot s;
  s.state = PhaseSpaceState(SpatialGrid(1, {nx}, {L}), nv);
  s.state.time = get<double>(is);
  s.nu = get<double>(is);
  for (int n = 0; n < nv; ++n)
    for (int i = 0; i < nx; ++i) s.state.coeffs(n, i) = get<double>(is);
  return s;
}

void write_density_snapshot(const std::string& path, const DensitySnapshot& s) {
  auto os = open_out(path);
  write_density_snapshot(os, s);
}
DensitySnapshot read_density_snapshot(const std::string& path) {
  auto is = open_in(path);
  return read_density_snapshot(is);
}
void write_state_snapshot(const std::string& path, const PhaseSpaceState& s, double nu) {
  auto os = open_out(path);
  write_state_snapshot(os, s, nu);
}
StateSnapshot read_state_snapshot(const std::string& path) {
  auto is = open_in(path);
  return read_state_snapshot(is);
}

}  // namespace vfpk
