// Cross sections, transfer kernel, source and boundary data on a grid.
#ifndef NTSDE_MATERIAL_HPP
#define NTSDE_MATERIAL_HPP

#include <array>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "ntsde/grid.hpp"

namespace ntsde {

/// sigma(E') f(mu', phi', E' -> mu, phi, E) per unit (mu, phi, E).
///
/// Stored either densely over (cell, g', d', g, d) or, for isotropic
/// emission, as a per-cell energy matrix sigma_E(g', g) so that
/// sigma' f = sigma_E(g', g) / (4 pi).
class TransferKernel {
 public:
  TransferKernel() = default;

  /// One (G x G) energy matrix per cell, rows indexed by the incoming group.
  static TransferKernel isotropic(std::vector<Eigen::MatrixXd> per_cell);
  /// Same energy matrix everywhere.
  static TransferKernel isotropic(const Eigen::MatrixXd& energy_kernel, int num_cells);
  /// Flat values laid out as ((((cell * G + g') * D + d') * G + g) * D + d).
  static TransferKernel dense(int num_cells, int num_groups, int num_dirs,
                              std::vector<double> values);

  bool is_isotropic() const { return isotropic_; }
  bool empty() const { return !isotropic_ && values_.empty(); }

  double operator()(int cell, int g_in, int d_in, int g_out, int d_out) const;

  /// Scales every entry; handy for building inconsistent kernels in tests.
  TransferKernel scaled(double factor) const;

  int num_cells() const { return num_cells_; }
  int num_groups() const { return num_groups_; }
  int num_dirs() const { return num_dirs_; }

 private:
  bool isotropic_ = false;
  int num_cells_ = 0;
  int num_groups_ = 0;
  int num_dirs_ = 0;
  std::vector<Eigen::MatrixXd> energy_;
  std::vector<double> values_;
};

struct MaterialSpec {
  Eigen::ArrayXXd sigma_total;    ///< (cells x G) [1/length]
  Eigen::ArrayXXd sigma_capture;  ///< (cells x G) [1/length]
  Eigen::ArrayXd speed;           ///< (G) [length/time]
  TransferKernel kernel;
  /// Q per unit volume, solid angle, energy and time (cells x G); empty = none.
  Eigen::ArrayXXd source;
  double source_t_on = 0.0;
  double source_t_off = std::numeric_limits<double>::infinity();
  /// Declares v sigma = v sigma_c + sum v sigma' f dmu dphi dE in every
  /// (cell, group); enforced at construction.
  bool conservative = false;
};

/// Immutable material description on a specific grid. Derived quantities
/// (sigma_hat, c_hat) are computed here and never read from input.
class MaterialModel {
 public:
  MaterialModel(const PhaseSpaceGrid& grid, MaterialSpec spec);

  double sigma_total(int cell, int g) const { return spec_.sigma_total(cell, g); }
  double sigma_capture(int cell, int g) const { return spec_.sigma_capture(cell, g); }
  double sigma_hat(int cell, int g) const { return sigma_total(cell, g) - sigma_capture(cell, g); }
  double speed(int g) const { return spec_.speed(g); }
  double transfer(int cell, int g_in, int d_in, int g_out, int d_out) const {
    return spec_.kernel(cell, g_in, d_in, g_out, d_out);
  }
  /// f_hat = sigma' f / sigma_hat, zero where sigma_hat is zero.
  double f_hat(int cell, int g_in, int d_in, int g_out, int d_out) const;
  /// Mean neutrons emitted per non-capture collision; 1 where sigma_hat = 0.
  double c_hat(int cell, int g) const { return c_hat_(cell, g); }
  /// Q at time t (zero outside the source window).
  double source(int cell, int g, double t) const;
  bool has_source() const { return spec_.source.size() > 0; }
  bool has_kernel() const { return !spec_.kernel.empty(); }
  bool conservative() const { return spec_.conservative; }
  int num_cells() const { return static_cast<int>(spec_.sigma_total.rows()); }
  int num_groups() const { return static_cast<int>(spec_.sigma_total.cols()); }
  const MaterialSpec& spec() const { return spec_; }

 private:
  MaterialSpec spec_;
  Eigen::ArrayXXd c_hat_;
};

struct ConservationReport {
  /// v sigma - (v sigma_c + sum v sigma' f dmu dphi dE), (cells x G).
  Eigen::ArrayXXd residual;
  double tolerance = 1e-9;
  std::vector<std::pair<int, int>> flagged;  ///< (cell, group) above tolerance
  bool ok() const { return flagged.empty(); }
  double max_abs() const { return residual.size() ? residual.abs().maxCoeff() : 0.0; }
};

ConservationReport verify_conservation(const MaterialModel& mat, const PhaseSpaceGrid& grid,
                                       double tolerance = 1e-9);

enum class Face { x_lo = 0, x_hi, y_lo, y_hi, z_lo, z_hi };
enum class BoundaryKind { vacuum, reflecting, inflow };

constexpr Axis axis_of(Face f) { return static_cast<Axis>(static_cast<int>(f) / 2); }
constexpr bool is_low(Face f) { return static_cast<int>(f) % 2 == 0; }

/// Boundary condition of one face. An inflow face feeds `inflow_rate`
/// neutrons per unit time, split evenly over the face's cells and inward
/// direction bins, and over groups by `group_weights` (uniform if empty),
/// while t lies in [t_on, t_off).
struct FaceCondition {
  BoundaryKind kind = BoundaryKind::vacuum;
  double inflow_rate = 0.0;
  Eigen::ArrayXd group_weights;
  double t_on = 0.0;
  double t_off = std::numeric_limits<double>::infinity();
};

struct Boundaries {
  std::array<FaceCondition, 6> faces{};
  FaceCondition& operator[](Face f) { return faces[static_cast<int>(f)]; }
  const FaceCondition& operator[](Face f) const { return faces[static_cast<int>(f)]; }
};

/// Grid + material + boundaries: everything a packet's change table needs.
struct TransportModel {
  TransportModel(PhaseSpaceGrid g, MaterialModel m, Boundaries b = {});

  /// Inflow into one boundary packet [neutrons/time], zero when inactive.
  double inflow_rate(Face face, int dir, int group, double t) const;

  PhaseSpaceGrid grid;
  MaterialModel material;
  Boundaries boundaries;
};

}  // namespace ntsde

#endif  // NTSDE_MATERIAL_HPP
