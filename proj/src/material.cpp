#include "ntsde/material.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "ntsde/errors.hpp"

namespace ntsde {

TransferKernel TransferKernel::isotropic(std::vector<Eigen::MatrixXd> per_cell) {
  if (per_cell.empty()) throw UsageError("isotropic kernel: no cells");
  const auto g = per_cell.front().rows();
  for (const auto& m : per_cell) {
    if (m.rows() != g || m.cols() != g) throw UsageError("isotropic kernel: matrices must be G x G");
    if ((m.array() < 0).any()) throw UsageError("isotropic kernel: negative entry");
  }
  TransferKernel k;
  k.isotropic_ = true;
  k.num_cells_ = static_cast<int>(per_cell.size());
  k.num_groups_ = static_cast<int>(g);
  k.energy_ = std::move(per_cell);
  return k;
}

TransferKernel TransferKernel::isotropic(const Eigen::MatrixXd& energy_kernel, int num_cells) {
  return isotropic(std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(num_cells), energy_kernel));
}

TransferKernel TransferKernel::dense(int num_cells, int num_groups, int num_dirs,
                                     std::vector<double> values) {
  const std::size_t block = static_cast<std::size_t>(num_groups) * num_dirs;
  if (values.size() != static_cast<std::size_t>(num_cells) * block * block) {
    throw UsageError("dense kernel: value count does not match cells * (G * D)^2");
  }
  for (double v : values) {
    if (!(v >= 0)) throw UsageError("dense kernel: negative or NaN entry");
  }
  TransferKernel k;
  k.num_cells_ = num_cells;
  k.num_groups_ = num_groups;
  k.num_dirs_ = num_dirs;
  k.values_ = std::move(values);
  return k;
}

double TransferKernel::operator()(int cell, int g_in, int d_in, int g_out, int d_out) const {
  if (isotropic_) {
    return energy_[static_cast<std::size_t>(cell)](g_in, g_out) / (4.0 * std::numbers::pi);
  }
  if (values_.empty()) return 0.0;
  const std::size_t gd = static_cast<std::size_t>(num_groups_) * num_dirs_;
  const std::size_t row = (static_cast<std::size_t>(cell) * num_groups_ + g_in) * num_dirs_ + d_in;
  const std::size_t col = static_cast<std::size_t>(g_out) * num_dirs_ + d_out;
  return values_[row * gd + col];
}

TransferKernel TransferKernel::scaled(double factor) const {
  TransferKernel k = *this;
  for (auto& m : k.energy_) m *= factor;
  for (auto& v : k.values_) v *= factor;
  return k;
}

MaterialModel::MaterialModel(const PhaseSpaceGrid& grid, MaterialSpec spec) : spec_(std::move(spec)) {
  const int cells = grid.num_cells();
  const int groups = grid.ngroups();
  const int dirs = grid.num_directions();
  if (spec_.sigma_total.rows() != cells || spec_.sigma_total.cols() != groups ||
      spec_.sigma_capture.rows() != cells || spec_.sigma_capture.cols() != groups) {
    throw UsageError("material: cross-section arrays must be (cells x groups)");
  }
  if (spec_.speed.size() != groups) throw UsageError("material: speed must have one entry per group");
  if ((spec_.speed <= 0).any()) throw UsageError("material: speeds must be > 0");
  if ((spec_.sigma_capture < 0).any()) throw UsageError("material: negative capture cross section");
  if ((spec_.sigma_capture > spec_.sigma_total).any()) {
    throw UsageError("material: capture cross section exceeds total");
  }
  if (spec_.source.size() > 0) {
    if (spec_.source.rows() != cells || spec_.source.cols() != groups) {
      throw UsageError("material: source must be (cells x groups)");
    }
    if ((spec_.source < 0).any()) throw UsageError("material: negative source");
  }
  const auto& k = spec_.kernel;
  if (!k.empty()) {
    if (k.num_cells() != cells || k.num_groups() != groups ||
        (!k.is_isotropic() && k.num_dirs() != dirs)) {
      throw UsageError("material: kernel dimensions do not match the grid");
    }
  }

  const double measure = grid.bin_measure();
  c_hat_ = Eigen::ArrayXXd::Ones(cells, groups);
  for (int c = 0; c < cells; ++c) {
    for (int gi = 0; gi < groups; ++gi) {
      // Emission per collision must not depend on the incoming direction.
      double first = 0.0;
      for (int di = 0; di < (k.is_isotropic() ? 1 : dirs); ++di) {
        double emitted = 0.0;
        for (int go = 0; go < groups; ++go) {
          for (int d = 0; d < dirs; ++d) emitted += k(c, gi, di, go, d) * measure;
        }
        if (di == 0) {
          first = emitted;
        } else if (std::abs(emitted - first) > 1e-12 * std::max(1.0, std::abs(first))) {
          throw UsageError("material: kernel emission depends on the incoming direction");
        }
      }
      const double s_hat = sigma_hat(c, gi);
      if (s_hat > 0) {
        c_hat_(c, gi) = first / s_hat;
      } else if (first > 0) {
        throw UsageError("material: transfer kernel nonzero where sigma_total == sigma_capture");
      }
    }
  }

  if (spec_.conservative) {
    const auto report = verify_conservation(*this, grid);
    if (!report.ok()) {
      std::ostringstream os;
      os << "material: declared conservative but residual " << report.max_abs()
         << " exceeds " << report.tolerance;
      throw UsageError(os.str());
    }
  }
}

double MaterialModel::f_hat(int cell, int g_in, int d_in, int g_out, int d_out) const {
  const double s_hat = sigma_hat(cell, g_in);
  return s_hat > 0 ? transfer(cell, g_in, d_in, g_out, d_out) / s_hat : 0.0;
}

double MaterialModel::source(int cell, int g, double t) const {
  if (spec_.source.size() == 0 || t < spec_.source_t_on || t >= spec_.source_t_off) return 0.0;
  return spec_.source(cell, g);
}

ConservationReport verify_conservation(const MaterialModel& mat, const PhaseSpaceGrid& grid,
                                       double tolerance) {
  const int cells = grid.num_cells();
  const int groups = grid.ngroups();
  const int dirs = grid.num_directions();
  const double measure = grid.bin_measure();
  ConservationReport report;
  report.tolerance = tolerance;
  report.residual.resize(cells, groups);
  for (int c = 0; c < cells; ++c) {
    for (int gi = 0; gi < groups; ++gi) {
      const double v = mat.speed(gi);
      double out = v * mat.sigma_capture(c, gi);
      for (int go = 0; go < groups; ++go) {
        for (int d = 0; d < dirs; ++d) out += v * mat.transfer(c, gi, 0, go, d) * measure;
      }
      const double r = v * mat.sigma_total(c, gi) - out;
      report.residual(c, gi) = r;
      if (std::abs(r) > tolerance) report.flagged.emplace_back(c, gi);
    }
  }
  return report;
}

TransportModel::TransportModel(PhaseSpaceGrid g, MaterialModel m, Boundaries b)
    : grid(std::move(g)), material(std::move(m)), boundaries(std::move(b)) {
  for (int f = 0; f < 6; ++f) {
    const auto face = static_cast<Face>(f);
    const auto& fc = boundaries[face];
    if (fc.kind == BoundaryKind::reflecting && grid.axis_active(axis_of(face)) &&
        axis_of(face) == Axis::y && grid.nphi() % 2 != 0) {
      throw UsageError("transport model: reflecting y faces need an even azimuthal count");
    }
    if (fc.kind == BoundaryKind::inflow) {
      if (!(fc.inflow_rate >= 0)) throw UsageError("transport model: inflow rate must be >= 0");
      if (fc.group_weights.size() != 0 && fc.group_weights.size() != grid.ngroups()) {
        throw UsageError("transport model: inflow group weights must have one entry per group");
      }
    }
  }
}

double TransportModel::inflow_rate(Face face, int dir, int group, double t) const {
  const auto& fc = boundaries[face];
  if (fc.kind != BoundaryKind::inflow || t < fc.t_on || t >= fc.t_off) return 0.0;
  const Axis axis = axis_of(face);
  const double c = grid.cosines(dir).along(axis);
  const bool inward = is_low(face) ? c > 0 : c < 0;
  if (!inward) return 0.0;
  int n_inward = 0;
  for (int d = 0; d < grid.num_directions(); ++d) {
    const double cd = grid.cosines(d).along(axis);
    n_inward += is_low(face) ? (cd > 0) : (cd < 0);
  }
  int face_cells = 1;
  for (Axis other : {Axis::x, Axis::y, Axis::z}) {
    if (other != axis) face_cells *= grid.count(other);
  }
  const double w = fc.group_weights.size() ? fc.group_weights(group) / fc.group_weights.sum()
                                           : 1.0 / grid.ngroups();
  return fc.inflow_rate * w / (static_cast<double>(face_cells) * n_inward);
}

}  // namespace ntsde
