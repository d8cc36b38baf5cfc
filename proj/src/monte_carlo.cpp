#include "ntsde/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ntsde/errors.hpp"
#include "ntsde/rng.hpp"

namespace ntsde {

namespace {

constexpr std::uint64_t kMcTag = 0x4d4f4e54452d4341ULL;  // "MONTE-CA"

int mc_steps(double t_end, double mc_dt) {
  if (!(mc_dt > 0)) throw UsageError("monte carlo: mc_dt must be > 0");
  return static_cast<int>(std::llround(t_end / mc_dt));
}

}  // namespace

PathResult mc_slab_run(const SlabProblem& prob, std::uint64_t seed) {
  const auto& p = prob.params();
  const double dt = p.mc_dt;
  const int steps = mc_steps(p.t_end, dt);
  const double v = p.speed;
  const double dx = prob.dx();
  const Eigen::ArrayXd p_capture = v * p.sigma_c * dt;
  const Eigen::ArrayXd p_collide = v * (p.sigma_c + p.sigma_s) * dt;
  if ((p_collide >= 1.0).any()) {
    throw UsageError("mc_slab_run: v sigma mc_dt must be < 1 in every cell");
  }

  std::mt19937_64 rng(derive_seed(seed, kMcTag));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  PathResult r;
  r.seed = seed;
  auto& left = r.add_series("left_leakage");
  auto& right = r.add_series("right_leakage");
  auto& capture = r.add_series("capture_rate");
  auto& total = r.add_series("total");

  std::vector<Particle> live;
  double carry = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    if (prob.influx_on(t)) {
      carry += p.influx * dt;
      const auto count = static_cast<long>(std::floor(carry + 1e-9));
      carry -= static_cast<double>(count);
      for (long c = 0; c < count; ++c) live.push_back({0.0, 1.0 - unit(rng)});
    }
    long out_left = 0, out_right = 0, captured = 0;
    for (std::size_t q = 0; q < live.size();) {
      Particle& pt = live[q];
      const int cell = std::min(static_cast<int>(pt.x / dx), p.cells - 1);
      const double u = unit(rng);
      bool dead = false;
      if (u < p_capture(cell)) {
        ++captured;
        dead = true;
      } else if (u < p_collide(cell)) {
        pt.mu = 2.0 * unit(rng) - 1.0;
      } else {
        pt.x += pt.mu * v * dt;
        if (pt.x < 0.0) {
          ++out_left;
          dead = true;
        } else if (pt.x > p.x_max) {
          ++out_right;
          dead = true;
        }
      }
      if (dead) {
        live[q] = live.back();
        live.pop_back();
      } else {
        ++q;
      }
    }
    r.time.push_back((k + 1) * dt);
    left.push_back(static_cast<double>(out_left) / dt);
    right.push_back(static_cast<double>(out_right) / dt);
    capture.push_back(static_cast<double>(captured) / dt);
    total.push_back(static_cast<double>(live.size()));
  }
  return r;
}

PathResult mc_energy_run(const EnergyProblem& prob, std::uint64_t seed) {
  const auto& p = prob.params();
  const int ng = p.groups;
  const double dt = p.mc_dt;
  const int steps = mc_steps(p.t_end, dt);
  const double de = prob.de();

  // Row g: capture, then transfer to each g2, as cumulative probabilities.
  Eigen::MatrixXd cumulative(ng, ng + 1);
  for (int g = 0; g < ng; ++g) {
    double acc = p.v_sigma_c(g) * dt;
    cumulative(g, 0) = acc;
    for (int g2 = 0; g2 < ng; ++g2) {
      acc += p.kernel(g, g2) * de * dt;
      cumulative(g, g2 + 1) = acc;
    }
    if (acc >= 1.0) throw UsageError("mc_energy_run: per-step event probability must be < 1");
  }
  std::vector<long> n(static_cast<std::size_t>(ng));
  for (int g = 0; g < ng; ++g) {
    const double init = p.initial(g);
    if (init != std::floor(init)) throw UsageError("mc_energy_run: initial counts must be integers");
    n[g] = static_cast<long>(init);
  }
  std::vector<double> carry(static_cast<std::size_t>(ng), 0.0);

  std::mt19937_64 rng(derive_seed(seed, kMcTag));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  PathResult r;
  r.seed = seed;
  auto& low = r.add_series("n_low");
  auto& high = r.add_series("n_high");
  auto record = [&](double t) {
    long lo = 0, hi = 0;
    for (int g = 0; g < ng; ++g) (prob.in_low_band(g) ? lo : hi) += n[g];
    r.time.push_back(t);
    low.push_back(static_cast<double>(lo));
    high.push_back(static_cast<double>(hi));
  };

  std::vector<long> next(static_cast<std::size_t>(ng));
  for (int k = 0; k < steps; ++k) {
    record(k * dt);
    next = n;
    for (int g = 0; g < ng; ++g) {
      for (long c = 0; c < n[g]; ++c) {
        const double u = unit(rng);
        if (u >= cumulative(g, ng)) continue;
        --next[g];
        if (u < cumulative(g, 0)) continue;  // captured
        for (int g2 = 0; g2 < ng; ++g2) {
          if (u < cumulative(g, g2 + 1)) {
            ++next[g2];
            break;
          }
        }
      }
      carry[g] += p.source(g) * de * dt;
      const auto add = static_cast<long>(std::floor(carry[g] + 1e-9));
      carry[g] -= static_cast<double>(add);
      next[g] += add;
    }
    n.swap(next);
  }
  record(steps * dt);
  return r;
}

}  // namespace ntsde
