// Discretized phase space: position cells, direction bins and energy groups.
#ifndef NTSDE_GRID_HPP
#define NTSDE_GRID_HPP

#include <array>
#include <cstddef>
#include <vector>

namespace ntsde {

struct GridCounts {
  int nx = 1;      ///< x-intervals
  int ny = 1;      ///< y-intervals; 1 collapses the axis
  int nz = 1;      ///< z-intervals; 1 collapses the axis
  int nmu = 1;     ///< direction-cosine intervals on [-1, 1]
  int nphi = 1;    ///< azimuthal intervals on [0, 2pi]
  int ngroups = 1; ///< energy groups on [0, E_max]
  bool operator==(const GridCounts&) const = default;
};

struct GridExtents {
  double x_max = 1.0;
  double y_max = 1.0;
  double z_max = 1.0;
  double e_max = 1.0;
  bool operator==(const GridExtents&) const = default;
};

enum class Axis { x = 0, y = 1, z = 2 };

/// Flat coordinates of one packet (cell x direction x group).
struct PacketIndex {
  int cell = 0;
  int dir = 0;
  int group = 0;
  bool operator==(const PacketIndex&) const = default;
};

/// Direction cosines of a (mu, phi) bin midpoint. Components below 1e-12
/// in magnitude are stored as exactly zero.
struct DirectionCosines {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double along(Axis a) const { return a == Axis::x ? x : (a == Axis::y ? y : z); }
};

class PhaseSpaceGrid {
 public:
  PhaseSpaceGrid(GridCounts counts, GridExtents extents);

  const GridCounts& counts() const { return counts_; }
  const GridExtents& extents() const { return extents_; }

  int nx() const { return counts_.nx; }
  int ny() const { return counts_.ny; }
  int nz() const { return counts_.nz; }
  int nmu() const { return counts_.nmu; }
  int nphi() const { return counts_.nphi; }
  int ngroups() const { return counts_.ngroups; }

  double dx() const { return dx_; }
  double dy() const { return dy_; }
  double dz() const { return dz_; }
  double dmu() const { return dmu_; }
  double dphi() const { return dphi_; }
  double de() const { return de_; }
  double width(Axis a) const;
  int count(Axis a) const;

  /// y and z axes with a single interval carry no streaming.
  bool axis_active(Axis a) const { return a == Axis::x || count(a) > 1; }

  // Lower edges with 0-based indices: x_edge(i) is the left edge of cell i.
  double x_edge(int i) const { return i * dx_; }
  double y_edge(int j) const { return j * dy_; }
  double z_edge(int k) const { return k * dz_; }
  double mu_edge(int l) const { return -1.0 + l * dmu_; }
  double phi_edge(int m) const { return m * dphi_; }
  double e_edge(int g) const { return g * de_; }

  double mu_mid(int l) const { return -1.0 + (l + 0.5) * dmu_; }
  double phi_mid(int m) const { return (m + 0.5) * dphi_; }
  double e_mid(int g) const { return (g + 0.5) * de_; }

  int num_cells() const { return counts_.nx * counts_.ny * counts_.nz; }
  int num_directions() const { return counts_.nmu * counts_.nphi; }
  std::size_t num_packets() const {
    return static_cast<std::size_t>(num_cells()) * num_directions() * counts_.ngroups;
  }

  int cell(int i, int j, int k) const { return (k * counts_.ny + j) * counts_.nx + i; }
  std::array<int, 3> cell_coords(int cell) const;
  int direction(int l, int m) const { return l * counts_.nphi + m; }
  int mu_index(int dir) const { return dir / counts_.nphi; }
  int phi_index(int dir) const { return dir % counts_.nphi; }

  std::size_t packet(int cell, int dir, int group) const {
    return (static_cast<std::size_t>(cell) * num_directions() + dir) * counts_.ngroups + group;
  }
  std::size_t packet(PacketIndex p) const { return packet(p.cell, p.dir, p.group); }
  PacketIndex unpack(std::size_t packet) const;

  const DirectionCosines& cosines(int dir) const { return cosines_[dir]; }

  /// Direction obtained by reflecting `dir` in a face normal to `axis`.
  int mirror(int dir, Axis axis) const;

  double cell_volume() const { return dx_ * dy_ * dz_; }
  /// dmu * dphi * dE, the measure of one outgoing (direction, energy) bin.
  double bin_measure() const { return dmu_ * dphi_ * de_; }

  bool operator==(const PhaseSpaceGrid& o) const {
    return counts_ == o.counts_ && extents_ == o.extents_;
  }

 private:
  GridCounts counts_;
  GridExtents extents_;
  double dx_, dy_, dz_, dmu_, dphi_, de_;
  std::vector<DirectionCosines> cosines_;
};

}  // namespace ntsde

#endif  // NTSDE_GRID_HPP
