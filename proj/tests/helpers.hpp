// Shared builders for the test binaries.
#ifndef NTSDE_TEST_HELPERS_HPP
#define NTSDE_TEST_HELPERS_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ntsde/changes.hpp"
#include "ntsde/material.hpp"
#include "ntsde/sde.hpp"

namespace testing {

using namespace ntsde;

/// 20 unit groups on [0, 20]; low band (E < 10) captures at 1.0, high band
/// at 0.1 and re-emits 0.045 per unit energy into every group.
inline EnergyParams two_band_params() {
  EnergyParams p;
  p.groups = 20;
  p.e_max = 20;
  p.v_sigma = Eigen::ArrayXd::Ones(20);
  p.v_sigma_c = Eigen::ArrayXd::Constant(20, 0.1);
  p.v_sigma_c.head(10).setConstant(1.0);
  p.kernel = Eigen::MatrixXd::Zero(20, 20);
  p.kernel.bottomRows(10).setConstant(0.045);
  p.source = Eigen::ArrayXd::Zero(20);
  p.source.tail(10).setConstant(22.0);
  p.initial = Eigen::ArrayXd::Zero(20);
  p.initial.tail(10).setConstant(40.0);
  p.dt = 0.02;
  p.t_end = 2.0;
  p.mc_dt = 0.02;
  p.band_split = 10.0;
  return p;
}

/// Single packet (one cell, mu = 0, one group) with capture only.
inline TransportModel capture_only(double v_sigma_c) {
  PhaseSpaceGrid grid({1, 1, 1, 1, 1, 1}, {1.0, 1.0, 1.0, 1.0});
  MaterialSpec spec;
  spec.sigma_total = Eigen::ArrayXXd::Constant(1, 1, v_sigma_c);
  spec.sigma_capture = Eigen::ArrayXXd::Constant(1, 1, v_sigma_c);
  spec.speed = Eigen::ArrayXd::Ones(1);
  MaterialModel mat(grid, std::move(spec));
  return TransportModel(std::move(grid), std::move(mat));
}

/// Random model of at most six packets with a dense, direction-dependent
/// kernel whose total emission per collision is direction-independent.
/// `streaming` picks three cells x two directions x one group, otherwise
/// one cell x two directions x three groups; all faces are vacuum.
inline TransportModel random_model(std::mt19937_64& rng, bool streaming, bool multiplying,
                                   bool with_source) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  const GridCounts counts = streaming ? GridCounts{3, 1, 1, 2, 1, 1} : GridCounts{1, 1, 1, 2, 1, 3};
  PhaseSpaceGrid grid(counts, {1.5, 1.0, 1.0, 2.0});
  const int cells = grid.num_cells(), groups = grid.ngroups(), dirs = grid.num_directions();
  MaterialSpec spec;
  spec.sigma_total.resize(cells, groups);
  spec.sigma_capture.resize(cells, groups);
  spec.speed.resize(groups);
  for (int g = 0; g < groups; ++g) spec.speed(g) = u(rng);
  const double measure = grid.bin_measure();
  const std::size_t block = static_cast<std::size_t>(groups) * dirs;
  std::vector<double> values(cells * block * block);
  for (int c = 0; c < cells; ++c) {
    for (int g = 0; g < groups; ++g) {
      spec.sigma_capture(c, g) = 0.3 * u(rng);
      spec.sigma_total(c, g) = spec.sigma_capture(c, g) + u(rng);
      const double s_hat = spec.sigma_total(c, g) - spec.sigma_capture(c, g);
      const double c_hat = multiplying ? 1.0 + u(rng) : 1.0;
      for (int d = 0; d < dirs; ++d) {
        double sum = 0.0;
        const std::size_t row = ((static_cast<std::size_t>(c) * groups + g) * dirs + d) * block;
        for (std::size_t k = 0; k < block; ++k) sum += (values[row + k] = u(rng));
        for (std::size_t k = 0; k < block; ++k) values[row + k] *= c_hat * s_hat / (sum * measure);
      }
    }
  }
  spec.kernel = TransferKernel::dense(cells, groups, dirs, std::move(values));
  if (with_source) {
    spec.source.resize(cells, groups);
    for (int c = 0; c < cells; ++c)
      for (int g = 0; g < groups; ++g) spec.source(c, g) = u(rng);
  }
  MaterialModel mat(grid, std::move(spec));
  return TransportModel(std::move(grid), std::move(mat));
}

inline PopulationState random_state(std::mt19937_64& rng, const TransportModel& m, double scale = 10.0) {
  std::uniform_real_distribution<double> u(0.0, scale);
  PopulationState s = PopulationState::zeros(m.grid);
  for (Eigen::Index i = 0; i < s.n.size(); ++i) s.n(i) = u(rng);
  return s;
}

}  // namespace testing

#endif  // NTSDE_TEST_HELPERS_HPP
