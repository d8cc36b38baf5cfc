#include "ntsde/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ntsde/errors.hpp"

namespace ntsde {

namespace {

double snap(double c) { return std::abs(c) < 1e-12 ? 0.0 : c; }

}  // namespace

PhaseSpaceGrid::PhaseSpaceGrid(GridCounts counts, GridExtents extents)
    : counts_(counts), extents_(extents) {
  if (counts.nx < 1 || counts.ny < 1 || counts.nz < 1 || counts.nmu < 1 || counts.nphi < 1 ||
      counts.ngroups < 1) {
    throw UsageError("phase-space grid: every interval count must be >= 1");
  }
  if (!(extents.x_max > 0) || !(extents.y_max > 0) || !(extents.z_max > 0) ||
      !(extents.e_max > 0)) {
    throw UsageError("phase-space grid: every extent must be > 0");
  }
  dx_ = extents.x_max / counts.nx;
  dy_ = extents.y_max / counts.ny;
  dz_ = extents.z_max / counts.nz;
  dmu_ = 2.0 / counts.nmu;
  dphi_ = 2.0 * std::numbers::pi / counts.nphi;
  de_ = extents.e_max / counts.ngroups;

  cosines_.resize(static_cast<std::size_t>(num_directions()));
  for (int l = 0; l < counts.nmu; ++l) {
    const double mu = mu_mid(l);
    const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    for (int m = 0; m < counts.nphi; ++m) {
      const double phi = phi_mid(m);
      cosines_[direction(l, m)] = {snap(mu), snap(s * std::cos(phi)), snap(s * std::sin(phi))};
    }
  }
}

double PhaseSpaceGrid::width(Axis a) const {
  switch (a) {
    case Axis::x: return dx_;
    case Axis::y: return dy_;
    case Axis::z: return dz_;
  }
  return dx_;
}

int PhaseSpaceGrid::count(Axis a) const {
  switch (a) {
    case Axis::x: return counts_.nx;
    case Axis::y: return counts_.ny;
    case Axis::z: return counts_.nz;
  }
  return counts_.nx;
}

std::array<int, 3> PhaseSpaceGrid::cell_coords(int cell) const {
  const int i = cell % counts_.nx;
  const int rest = cell / counts_.nx;
  return {i, rest % counts_.ny, rest / counts_.ny};
}

PacketIndex PhaseSpaceGrid::unpack(std::size_t packet) const {
  const auto g = static_cast<int>(packet % counts_.ngroups);
  const std::size_t rest = packet / counts_.ngroups;
  const auto d = static_cast<int>(rest % num_directions());
  const auto c = static_cast<int>(rest / num_directions());
  return {c, d, g};
}

int PhaseSpaceGrid::mirror(int dir, Axis axis) const {
  const int l = mu_index(dir);
  const int m = phi_index(dir);
  const int nphi = counts_.nphi;
  switch (axis) {
    case Axis::x:
      return direction(counts_.nmu - 1 - l, m);
    case Axis::y:
      // phi -> pi - phi
      if (nphi % 2 != 0) throw UsageError("reflection in y needs an even azimuthal count");
      return direction(l, ((nphi / 2 - 1 - m) % nphi + nphi) % nphi);
    case Axis::z:
      // phi -> 2pi - phi
      return direction(l, nphi - 1 - m);
  }
  return dir;
}

}  // namespace ntsde
