// Euler-Maruyama stepping of the stochastic difference systems.
//
// Three entry points share one contract (drift * dt plus one
// lambda * sqrt(rate * dt) * eta term per stochastic change, followed by
// clamping):
//   step_general  any TransportModel, channel by channel;
//   run_slab      mono-energetic slab with isotropic scattering;
//   run_energy    homogeneous medium with energy-group transfers.
// The specialised solvers are written directly on their index sets for
// speed; slab_transport_model / energy_transport_model express the same
// problems for step_general so the two routes can be checked against each
// other.
#ifndef NTSDE_SDE_HPP
#define NTSDE_SDE_HPP

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "ntsde/changes.hpp"
#include "ntsde/path_result.hpp"

namespace ntsde {

/// What happens to packet counts that an update drives below zero. Rates
/// always read max(n, 0).
///   rates_only     negative counts are kept (and counted) so the scheme
///                  stays unbiased in the mean;
///   zero_negative  negative counts are set to zero and the removed amount
///                  is logged as deficit.
enum class ClampPolicy { rates_only, zero_negative };

/// Per-(step, channel) standard normals; disabled means eta == 0.
class NoiseSource {
 public:
  static NoiseSource off() { return NoiseSource(); }
  explicit NoiseSource(std::uint64_t seed);

  bool enabled() const { return enabled_; }
  double eta(std::uint64_t step, std::uint64_t channel) const;

 private:
  NoiseSource() = default;
  bool enabled_ = false;
  std::uint64_t key_ = 0;
};

struct StepDiagnostics {
  std::size_t clamp_events = 0;  ///< packets negative after the update
  double clamp_deficit = 0.0;    ///< total negative mass at those packets
  std::size_t rate_clamps = 0;   ///< negative counts read as zero in rates
  FaceFlux leakage{};            ///< outflow rates at the step start
};

/// One step of the general stochastic difference system. With noise off
/// this is the expected-value recursion.
PopulationState step_general(const PopulationState& state, const TransportModel& model, double dt,
                             const NoiseSource& noise, std::uint64_t step_index,
                             StepDiagnostics* diag = nullptr,
                             ClampPolicy clamp = ClampPolicy::rates_only);

/// Largest v |mu_axis| dt / d_axis over groups, directions and active axes.
double courant_number(const TransportModel& model, double dt);

struct SlabParams {
  int cells = 0;        ///< I
  int directions = 0;   ///< J, even
  double x_max = 1.0;
  double speed = 0.0;
  Eigen::ArrayXd sigma_s;  ///< per cell
  Eigen::ArrayXd sigma_c;  ///< per cell
  double influx = 0.0;     ///< neutrons per unit time through x = 0
  double t_on = 0.0;
  double t_off = 0.0;
  double dt = 0.0;
  double t_end = 0.0;
  double mc_dt = 0.0;      ///< Monte Carlo step; 0 if unused
  ClampPolicy clamp = ClampPolicy::rates_only;
  std::vector<double> snapshot_times;
};

class SlabProblem {
 public:
  /// Rejects v dt / dx > 1 and odd J.
  explicit SlabProblem(SlabParams params);
  /// Same cross sections in every cell.
  static SlabProblem homogeneous(int cells, int directions, double x_max, double speed,
                                 double sigma_s, double sigma_c, double influx, double t_on,
                                 double t_off, double dt, double t_end, double mc_dt = 0.0);

  const SlabParams& params() const { return p_; }
  double dx() const { return p_.x_max / p_.cells; }
  double dmu() const { return 2.0 / p_.directions; }
  /// Bin midpoint; never zero because J is even.
  double mu(int j) const { return -1.0 + (j + 0.5) * dmu(); }
  int steps() const;
  bool influx_on(double t) const { return t >= p_.t_on && t < p_.t_off; }

 private:
  SlabParams p_;
};

struct EnergyParams {
  int groups = 0;
  double e_max = 0.0;
  Eigen::ArrayXd v_sigma;    ///< v sigma per group [1/time]
  Eigen::ArrayXd v_sigma_c;  ///< v sigma_c per group [1/time]
  /// v' sigma' f(g' -> g) per unit energy, row g' (from), column g (to).
  Eigen::MatrixXd kernel;
  Eigen::ArrayXd source;     ///< q per unit energy and time
  Eigen::ArrayXd initial;    ///< n(g, 0), neutrons per group
  double dt = 0.0;
  double t_end = 0.0;
  double mc_dt = 0.0;
  /// Groups whose upper edge is <= band_split form the low band.
  double band_split = 0.0;
  ClampPolicy clamp = ClampPolicy::rates_only;
  std::vector<double> snapshot_times;
};

class EnergyProblem {
 public:
  explicit EnergyProblem(EnergyParams params);
  const EnergyParams& params() const { return p_; }
  double de() const { return p_.e_max / p_.groups; }
  int steps() const;
  bool in_low_band(int g) const { return (g + 1) * de() <= p_.band_split * (1 + 1e-12); }

 private:
  EnergyParams p_;
};

struct GeneralProblem {
  TransportModel model;
  PopulationState initial;
  double dt = 0.0;
  double t_end = 0.0;
  ClampPolicy clamp = ClampPolicy::rates_only;
  std::vector<double> snapshot_times;
};

/// Observables: left_leakage, right_leakage, capture_rate (per step), total.
PathResult run_slab(const SlabProblem& prob, std::uint64_t seed);
/// Observables: n_low, n_high from t = 0.
PathResult run_energy(const EnergyProblem& prob, std::uint64_t seed);
/// Observables: total and leak_<face> for the six faces.
PathResult run_general(const GeneralProblem& prob, std::uint64_t seed);

PathResult run_deterministic(const SlabProblem& prob);
PathResult run_deterministic(const EnergyProblem& prob);
PathResult run_deterministic(const GeneralProblem& prob);

TransportModel slab_transport_model(const SlabProblem& prob);
/// Packet layout of slab_transport_model: packet(i, j) = i * J + j.
PopulationState slab_zero_state(const SlabProblem& prob);

/// One cell, one direction bin (mu = 0, no streaming), G groups, unit
/// speed so that the v sigma products carry over unchanged.
TransportModel energy_transport_model(const EnergyProblem& prob);
PopulationState energy_initial_state(const EnergyProblem& prob);

}  // namespace ntsde

#endif  // NTSDE_SDE_HPP
