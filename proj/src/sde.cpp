#include "ntsde/sde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "ntsde/errors.hpp"
#include "ntsde/rng.hpp"

namespace ntsde {

namespace {

constexpr std::uint64_t kSdeTag = 0x5344452d4e4f4953ULL;  // "SDE-NOIS"
constexpr std::array<const char*, 6> kFaceNames{"leak_x_lo", "leak_x_hi", "leak_y_lo",
                                                "leak_y_hi", "leak_z_lo", "leak_z_hi"};

int step_count(double t_end, double dt) {
  return static_cast<int>(std::llround(t_end / dt));
}

// Records negative entries and zeroes them under ClampPolicy::zero_negative.
template <typename Derived>
void apply_clamp(Eigen::DenseBase<Derived>& n, ClampPolicy policy, std::size_t& events,
                 double& deficit) {
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    auto& v = n.derived().data()[i];
    if (v < 0) {
      ++events;
      deficit -= v;
      if (policy == ClampPolicy::zero_negative) v = 0.0;
    }
  }
}

void maybe_snapshot(PathResult& r, const std::vector<double>& times, double t, double dt,
                    const Eigen::Ref<const Eigen::VectorXd>& n) {
  for (double ts : times) {
    if (std::abs(t - ts) < 0.5 * dt) r.snapshots.push_back({t, n});
  }
}

std::string nan_message(const char* where, std::uint64_t step, double t) {
  std::ostringstream os;
  os << where << ": non-finite state at step " << step << " (t = " << t << ")";
  return os.str();
}

}  // namespace

NoiseSource::NoiseSource(std::uint64_t seed) : enabled_(true), key_(derive_seed(seed, kSdeTag)) {}

double NoiseSource::eta(std::uint64_t step, std::uint64_t channel) const {
  if (!enabled_) return 0.0;
  return normal_at(derive_seed(key_, step), channel);
}

double courant_number(const TransportModel& model, double dt) {
  const auto& grid = model.grid;
  double worst = 0.0;
  for (int g = 0; g < grid.ngroups(); ++g) {
    for (int d = 0; d < grid.num_directions(); ++d) {
      for (Axis a : {Axis::x, Axis::y, Axis::z}) {
        if (!grid.axis_active(a)) continue;
        worst = std::max(worst, model.material.speed(g) * std::abs(grid.cosines(d).along(a)) * dt /
                                    grid.width(a));
      }
    }
  }
  return worst;
}

PopulationState step_general(const PopulationState& state, const TransportModel& model, double dt,
                             const NoiseSource& noise, std::uint64_t step_index,
                             StepDiagnostics* diag, ClampPolicy clamp) {
  if (!(dt > 0)) throw UsageError("step_general: dt must be > 0");
  if (courant_number(model, dt) > 1.0 + 1e-12) {
    throw UsageError("step_general: CFL condition v |mu| dt / dx <= 1 violated");
  }
  if (!state.finite()) throw UsageError("step_general: state is not finite");
  if (state.n.size() != static_cast<Eigen::Index>(model.grid.num_packets())) {
    throw UsageError("step_general: state size does not match the grid");
  }

  StepDiagnostics local;
  StepDiagnostics& d = diag ? *diag : local;
  Eigen::VectorXd next = state.n + dt * streaming_drift(state, model, &d.leakage);

  const auto set = stochastic_channels(state, model);
  d.rate_clamps += set.clamp_count;
  for (std::size_t j = 0; j < set.channels.size(); ++j) {
    const auto& ch = set.channels[j];
    if (ch.rate < 0) throw InternalError("step_general: negative rate after clamping");
    double amount = ch.rate * dt;
    if (noise.enabled()) amount += std::sqrt(ch.rate * dt) * noise.eta(step_index, j);
    next(static_cast<Eigen::Index>(ch.first)) += ch.first_delta * amount;
    if (ch.second != kNoPacket) next(static_cast<Eigen::Index>(ch.second)) += ch.second_delta * amount;
  }
  if (!next.allFinite()) throw InternalError(nan_message("step_general", step_index, state.t));
  apply_clamp(next, clamp, d.clamp_events, d.clamp_deficit);
  return {std::move(next), state.t + dt};
}

SlabProblem::SlabProblem(SlabParams params) : p_(std::move(params)) {
  if (p_.cells < 1) throw UsageError("slab: cell count must be >= 1");
  if (p_.directions < 2 || p_.directions % 2 != 0) throw UsageError("slab: J must be even and >= 2");
  if (!(p_.x_max > 0) || !(p_.speed > 0) || !(p_.dt > 0) || !(p_.t_end > 0)) {
    throw UsageError("slab: x_max, speed, dt and t_end must be > 0");
  }
  if (p_.sigma_s.size() != p_.cells || p_.sigma_c.size() != p_.cells) {
    throw UsageError("slab: sigma_s and sigma_c need one value per cell");
  }
  if ((p_.sigma_s < 0).any() || (p_.sigma_c < 0).any()) throw UsageError("slab: negative cross section");
  if (!(p_.influx >= 0) || p_.t_off < p_.t_on) throw UsageError("slab: invalid influx window");
  if (p_.mc_dt < 0) throw UsageError("slab: mc_dt must be >= 0");
  if (p_.speed * p_.dt / dx() > 1.0 + 1e-12) {
    throw UsageError("slab: CFL condition v dt / dx <= 1 violated");
  }
}

SlabProblem SlabProblem::homogeneous(int cells, int directions, double x_max, double speed,
                                     double sigma_s, double sigma_c, double influx, double t_on,
                                     double t_off, double dt, double t_end, double mc_dt) {
  SlabParams p;
  p.cells = cells;
  p.directions = directions;
  p.x_max = x_max;
  p.speed = speed;
  p.sigma_s = Eigen::ArrayXd::Constant(std::max(cells, 0), sigma_s);
  p.sigma_c = Eigen::ArrayXd::Constant(std::max(cells, 0), sigma_c);
  p.influx = influx;
  p.t_on = t_on;
  p.t_off = t_off;
  p.dt = dt;
  p.t_end = t_end;
  p.mc_dt = mc_dt;
  return SlabProblem(std::move(p));
}

int SlabProblem::steps() const { return step_count(p_.t_end, p_.dt); }

EnergyProblem::EnergyProblem(EnergyParams params) : p_(std::move(params)) {
  const int g = p_.groups;
  if (g < 1) throw UsageError("energy: group count must be >= 1");
  if (!(p_.e_max > 0) || !(p_.dt > 0) || !(p_.t_end > 0)) {
    throw UsageError("energy: e_max, dt and t_end must be > 0");
  }
  if (p_.v_sigma.size() != g || p_.v_sigma_c.size() != g || p_.source.size() != g ||
      p_.initial.size() != g || p_.kernel.rows() != g || p_.kernel.cols() != g) {
    throw UsageError("energy: per-group arrays must have G entries and the kernel G x G");
  }
  if ((p_.v_sigma_c < 0).any() || (p_.v_sigma_c > p_.v_sigma).any()) {
    throw UsageError("energy: need 0 <= v sigma_c <= v sigma");
  }
  if ((p_.kernel.array() < 0).any() || (p_.source < 0).any() || (p_.initial < 0).any()) {
    throw UsageError("energy: kernel, source and initial counts must be >= 0");
  }
  if (p_.mc_dt < 0) throw UsageError("energy: mc_dt must be >= 0");
}

int EnergyProblem::steps() const { return step_count(p_.t_end, p_.dt); }

namespace {

PathResult slab_path(const SlabProblem& prob, std::uint64_t seed, bool noise) {
  const auto& p = prob.params();
  const int ni = p.cells;
  const int nj = p.directions;
  const double dt = p.dt;
  const double v = p.speed;
  const double dx = prob.dx();

  std::vector<double> mu(static_cast<std::size_t>(nj)), courant(static_cast<std::size_t>(nj));
  for (int j = 0; j < nj; ++j) {
    mu[j] = prob.mu(j);
    courant[j] = std::abs(mu[j]) * v * dt / dx;
  }
  const Eigen::ArrayXd half_scatter = 0.5 * p.sigma_s * v * prob.dmu() * dt;
  const Eigen::ArrayXd removal = v * (p.sigma_s + p.sigma_c) * dt;
  const Eigen::ArrayXd capture_dt = v * p.sigma_c * dt;
  const double inject_per_bin = p.influx * dt / (nj / 2);

  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(ni, nj);
  Eigen::MatrixXd next(ni, nj);
  std::vector<double> tr_root(static_cast<std::size_t>(nj));

  PathResult r;
  r.seed = seed;
  const int steps = prob.steps();
  r.time.reserve(static_cast<std::size_t>(steps));
  auto& left = r.add_series("left_leakage");
  auto& right = r.add_series("right_leakage");
  auto& capture = r.add_series("capture_rate");
  auto& total = r.add_series("total");
  const std::uint64_t key = derive_seed(seed, kSdeTag);

  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    maybe_snapshot(r, p.snapshot_times, t, dt, Eigen::VectorXd(n.transpose().reshaped()));
    double out_left = 0.0, out_right = 0.0;
    for (int j = 0; j < nj; ++j) {
      if (mu[j] < 0) out_left += -mu[j] * v * n(0, j) / dx;
      else out_right += mu[j] * v * n(ni - 1, j) / dx;
    }
    left.push_back(out_left);
    right.push_back(out_right);
    capture.push_back((v * p.sigma_c.matrix().transpose() * n).sum());

    const bool inject = prob.influx_on(t);
    const std::uint64_t step_key = derive_seed(key, static_cast<std::uint64_t>(k));
    for (int i = 0; i < ni; ++i) {
      const double in_scatter = half_scatter(i) * n.row(i).sum();
      for (int j = 0; j < nj; ++j) {
        double stream;
        if (mu[j] > 0) {
          const double up = i > 0 ? n(i - 1, j) : 0.0;
          stream = courant[j] * (up - n(i, j));
          if (i == 0 && inject) stream += inject_per_bin;
        } else {
          const double up = i < ni - 1 ? n(i + 1, j) : 0.0;
          stream = courant[j] * (up - n(i, j));
        }
        next(i, j) = n(i, j) + stream - removal(i) * n(i, j) + in_scatter;
      }
      if (!noise) continue;
      NormalStream eta(derive_seed(step_key, static_cast<std::uint64_t>(i)));
      for (int j = 0; j < nj; ++j) {
        const double nij = std::max(n(i, j), 0.0);
        next(i, j) -= std::sqrt(capture_dt(i) * nij) * eta();
        tr_root[j] = std::sqrt(half_scatter(i) * nij);
      }
      // eta(i, j -> m) is shared by the loss from j and the gain in m.
      for (int j = 0; j < nj; ++j) {
        double lost = 0.0;
        for (int m = 0; m < nj; ++m) {
          if (m == j) continue;
          const double x = tr_root[j] * eta();
          lost += x;
          next(i, m) += x;
        }
        next(i, j) -= lost;
      }
    }
    if (!next.allFinite()) throw InternalError(nan_message("run_slab", k, t));
    apply_clamp(next, p.clamp, r.clamp_events, r.clamp_deficit);
    n.swap(next);
    r.time.push_back((k + 1) * dt);
    total.push_back(n.sum());
  }
  maybe_snapshot(r, p.snapshot_times, steps * dt, dt, Eigen::VectorXd(n.transpose().reshaped()));
  return r;
}

PathResult energy_path(const EnergyProblem& prob, std::uint64_t seed, bool noise) {
  const auto& p = prob.params();
  const int ng = p.groups;
  const double dt = p.dt;
  const double de = prob.de();
  const Eigen::ArrayXd source_dt = p.source * de * dt;
  const Eigen::MatrixXd transfer_dt = p.kernel * (de * dt);

  Eigen::VectorXd n = p.initial.matrix();
  Eigen::VectorXd next(ng);
  PathResult r;
  r.seed = seed;
  auto& low = r.add_series("n_low");
  auto& high = r.add_series("n_high");
  auto record = [&](double t) {
    double lo = 0.0, hi = 0.0;
    for (int g = 0; g < ng; ++g) (prob.in_low_band(g) ? lo : hi) += n(g);
    r.time.push_back(t);
    low.push_back(lo);
    high.push_back(hi);
    maybe_snapshot(r, p.snapshot_times, t, dt, n);
  };

  const std::uint64_t key = derive_seed(seed, kSdeTag);
  const int steps = prob.steps();
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    record(t);
    next = n + source_dt.matrix() - (p.v_sigma * dt).matrix().cwiseProduct(n) +
           transfer_dt.transpose() * n;
    if (noise) {
      NormalStream eta(derive_seed(key, static_cast<std::uint64_t>(k)));
      for (int g = 0; g < ng; ++g) {
        next(g) -= std::sqrt(p.v_sigma_c(g) * std::max(n(g), 0.0) * dt) * eta();
      }
      for (int g = 0; g < ng; ++g) {
        const double ng_pos = std::max(n(g), 0.0);
        for (int g2 = 0; g2 < ng; ++g2) {
          if (g2 == g || !(transfer_dt(g, g2) > 0)) continue;
          const double x = std::sqrt(transfer_dt(g, g2) * ng_pos) * eta();
          next(g) -= x;
          next(g2) += x;
        }
      }
    }
    if (!next.allFinite()) throw InternalError(nan_message("run_energy", k, t));
    apply_clamp(next, p.clamp, r.clamp_events, r.clamp_deficit);
    n.swap(next);
  }
  record(steps * dt);
  return r;
}

PathResult general_path(const GeneralProblem& prob, std::uint64_t seed, bool noise) {
  if (!(prob.dt > 0) || !(prob.t_end > 0)) throw UsageError("run_general: dt and t_end must be > 0");
  const NoiseSource source = noise ? NoiseSource(seed) : NoiseSource::off();
  PopulationState state = prob.initial;
  PathResult r;
  r.seed = seed;
  auto& total = r.add_series("total");
  for (const char* name : kFaceNames) r.add_series(name);
  const int steps = step_count(prob.t_end, prob.dt);
  for (int k = 0; k < steps; ++k) {
    state.t = k * prob.dt;
    maybe_snapshot(r, prob.snapshot_times, state.t, prob.dt, state.n);
    StepDiagnostics diag;
    state = step_general(state, prob.model, prob.dt, source, static_cast<std::uint64_t>(k), &diag,
                         prob.clamp);
    state.t = (k + 1) * prob.dt;
    r.clamp_events += diag.clamp_events;
    r.clamp_deficit += diag.clamp_deficit;
    r.time.push_back(state.t);
    total.push_back(state.n.sum());
    for (std::size_t f = 0; f < 6; ++f) r.series[1 + f].push_back(diag.leakage[f]);
  }
  maybe_snapshot(r, prob.snapshot_times, state.t, prob.dt, state.n);
  return r;
}

}  // namespace

PathResult run_slab(const SlabProblem& prob, std::uint64_t seed) { return slab_path(prob, seed, true); }
PathResult run_energy(const EnergyProblem& prob, std::uint64_t seed) {
  return energy_path(prob, seed, true);
}
PathResult run_general(const GeneralProblem& prob, std::uint64_t seed) {
  return general_path(prob, seed, true);
}

PathResult run_deterministic(const SlabProblem& prob) { return slab_path(prob, 0, false); }
PathResult run_deterministic(const EnergyProblem& prob) { return energy_path(prob, 0, false); }
PathResult run_deterministic(const GeneralProblem& prob) { return general_path(prob, 0, false); }

TransportModel slab_transport_model(const SlabProblem& prob) {
  const auto& p = prob.params();
  PhaseSpaceGrid grid({p.cells, 1, 1, p.directions, 1, 1}, {p.x_max, 1.0, 1.0, 1.0});
  MaterialSpec spec;
  spec.sigma_total = (p.sigma_s + p.sigma_c).matrix();
  spec.sigma_capture = p.sigma_c.matrix();
  spec.speed = Eigen::ArrayXd::Constant(1, p.speed);
  std::vector<Eigen::MatrixXd> kernel;
  for (int i = 0; i < p.cells; ++i) kernel.push_back(Eigen::MatrixXd::Constant(1, 1, p.sigma_s(i) / grid.de()));
  spec.kernel = TransferKernel::isotropic(std::move(kernel));
  MaterialModel mat(grid, std::move(spec));
  Boundaries bc;
  bc[Face::x_lo].kind = BoundaryKind::inflow;
  bc[Face::x_lo].inflow_rate = p.influx;
  bc[Face::x_lo].t_on = p.t_on;
  bc[Face::x_lo].t_off = p.t_off;
  return TransportModel(std::move(grid), std::move(mat), std::move(bc));
}

PopulationState slab_zero_state(const SlabProblem& prob) {
  return {Eigen::VectorXd::Zero(prob.params().cells * prob.params().directions), 0.0};
}

TransportModel energy_transport_model(const EnergyProblem& prob) {
  const auto& p = prob.params();
  PhaseSpaceGrid grid({1, 1, 1, 1, 1, p.groups}, {1.0, 1.0, 1.0, p.e_max});
  MaterialSpec spec;
  spec.sigma_total = p.v_sigma.matrix().transpose();
  spec.sigma_capture = p.v_sigma_c.matrix().transpose();
  spec.speed = Eigen::ArrayXd::Ones(p.groups);
  spec.kernel = TransferKernel::isotropic(p.kernel, 1);
  spec.source = (p.source / (4.0 * std::numbers::pi)).matrix().transpose();
  MaterialModel mat(grid, std::move(spec));
  return TransportModel(std::move(grid), std::move(mat));
}

PopulationState energy_initial_state(const EnergyProblem& prob) {
  return {prob.params().initial.matrix(), 0.0};
}

}  // namespace ntsde
