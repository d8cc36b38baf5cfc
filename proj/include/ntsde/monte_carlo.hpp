// Reference Monte Carlo simulators, coded independently of the SDE solvers:
//   mc_slab_run    analog particle tracking in the slab;
//   mc_energy_run  integer group populations with per-neutron events.
// Each run draws from its own std::mt19937_64 stream so the cross-check
// shares neither numerics nor random numbers with the SDE side.
#ifndef NTSDE_MONTE_CARLO_HPP
#define NTSDE_MONTE_CARLO_HPP

#include <cstdint>

#include "ntsde/path_result.hpp"
#include "ntsde/sde.hpp"

namespace ntsde {

struct Particle {
  double x = 0.0;
  double mu = 0.0;
};

/// Uses params().mc_dt. Observables per step of mc_dt, stamped at the
/// step end: left_leakage, right_leakage, capture_rate (counts / mc_dt),
/// and total (live particles after the step).
PathResult mc_slab_run(const SlabProblem& prob, std::uint64_t seed);

/// Uses params().mc_dt. Observables n_low, n_high from t = 0.
PathResult mc_energy_run(const EnergyProblem& prob, std::uint64_t seed);

}  // namespace ntsde

#endif  // NTSDE_MONTE_CARLO_HPP
