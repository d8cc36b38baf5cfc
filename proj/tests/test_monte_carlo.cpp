#include <doctest.h>

#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "ntsde/errors.hpp"
#include "ntsde/monte_carlo.hpp"

using namespace ntsde;

namespace {

double sum_counts(const std::vector<double>& per_dt, double dt) {
  return std::accumulate(per_dt.begin(), per_dt.end(), 0.0) * dt;
}

EnergyParams single_group_capture(double n0, double mc_dt) {
  EnergyParams p;
  p.groups = 1;
  p.e_max = 1.0;
  p.v_sigma = Eigen::ArrayXd::Constant(1, 0.1);
  p.v_sigma_c = Eigen::ArrayXd::Constant(1, 0.1);
  p.kernel = Eigen::MatrixXd::Zero(1, 1);
  p.source = Eigen::ArrayXd::Zero(1);
  p.initial = Eigen::ArrayXd::Constant(1, n0);
  p.dt = mc_dt;
  p.t_end = 10.0;
  p.mc_dt = mc_dt;
  p.band_split = 1.0;
  return p;
}

}  // namespace

TEST_SUITE("monte-carlo") {

TEST_CASE("ballistic slab: every particle leaves on the right after transit") {
  const auto slab = SlabProblem::homogeneous(4, 4, 1.0, 1.0, 0.0, 0.0, 1000.0, 0.0, 1.0, 0.1, 3.0, 0.01);
  const auto r = mc_slab_run(slab, 1);
  const double out = sum_counts(r.observable("right_leakage"), 0.01);
  CHECK(out + r.observable("total").back() == doctest::Approx(1000.0));
  CHECK(sum_counts(r.observable("left_leakage"), 0.01) == 0.0);
  CHECK(sum_counts(r.observable("capture_rate"), 0.01) == 0.0);
  // A particle injected at step k exits by t = 3 iff mu (300 - k) dt > 1,
  // with mu uniform on (0, 1].
  double expected = 0.0;
  for (int k = 0; k < 100; ++k) expected += 10.0 * std::max(0.0, 1.0 - 1.0 / ((300 - k) * 0.01));
  const double q = expected / 1000.0;
  CHECK(std::abs(out - expected) < 4 * std::sqrt(1000.0 * q * (1 - q)));
  // mu <= 1, so no particle can cross x_max = 1 before t = 1.
  for (std::size_t k = 0; k < r.time.size(); ++k) {
    if (r.time[k] < 1.0 - 1e-9) CHECK(r.observable("right_leakage")[k] == 0.0);
  }
  CHECK(r.time.size() == 300);
}

TEST_CASE("no influx, no particles") {
  const auto slab = SlabProblem::homogeneous(4, 4, 1.0, 1.0, 0.5, 0.5, 0.0, 0.0, 1.0, 0.1, 2.0, 0.01);
  const auto r = mc_slab_run(slab, 2);
  for (const auto& name : r.names)
    for (double v : r.observable(name)) CHECK(v == 0.0);
}

TEST_CASE("slab particle bookkeeping balances") {
  const auto slab = SlabProblem::homogeneous(8, 4, 2.0, 1.0, 0.6, 0.3, 200.0, 0.0, 1.0, 0.1, 4.0, 0.02);
  const auto r = mc_slab_run(slab, 3);
  const double out = sum_counts(r.observable("left_leakage"), 0.02) +
                     sum_counts(r.observable("right_leakage"), 0.02) +
                     sum_counts(r.observable("capture_rate"), 0.02);
  CHECK(out + r.observable("total").back() == doctest::Approx(200.0));
  CHECK(sum_counts(r.observable("left_leakage"), 0.02) > 0.0);
}

TEST_CASE("tallies are whole particle counts") {
  const auto slab = SlabProblem::homogeneous(8, 4, 2.0, 1.0, 0.6, 0.3, 137.0, 0.0, 1.0, 0.1, 3.0, 0.02);
  const auto r = mc_slab_run(slab, 4);
  for (const auto& name : r.names) {
    const double scale = name == "total" ? 1.0 : 0.02;
    for (double v : r.observable(name)) {
      const double count = v * scale;
      CHECK(count >= 0.0);
      CHECK(std::abs(count - std::round(count)) < 1e-9);
    }
  }
  const auto e = mc_energy_run(EnergyProblem(testing::two_band_params()), 4);
  for (const auto& name : e.names)
    for (double v : e.observable(name)) CHECK((v >= 0.0 && v == std::floor(v)));
}

TEST_CASE("pure capture: mean and variance of a pure-death process") {
  // Per-step survival 1 - 0.001 over 1000 steps: binomial(n0, 0.999^1000),
  // which is the pure-death law n0 (e^-1 - e^-2) up to O(dt).
  const int paths = 2000;
  const auto prob = EnergyProblem(single_group_capture(100.0, 0.01));
  double s1 = 0.0, s2 = 0.0;
  for (int p = 0; p < paths; ++p) {
    const auto r = mc_energy_run(prob, static_cast<std::uint64_t>(p));
    const double n = r.value_at("n_low", 10.0) + r.value_at("n_high", 10.0);
    s1 += n;
    s2 += n * n;
  }
  const double mean = s1 / paths;
  const double var = (s2 - paths * mean * mean) / (paths - 1);
  const double q = std::pow(0.999, 1000);
  const double var_exact = 100.0 * q * (1 - q);
  CHECK(std::abs(mean - 100.0 * q) < 5 * std::sqrt(var_exact / paths));
  CHECK(std::abs(mean - 100.0 * std::exp(-1.0)) < 5 * std::sqrt(var_exact / paths));
  CHECK(std::abs(var / (100.0 * (std::exp(-1.0) - std::exp(-2.0))) - 1.0) < 5 * std::sqrt(2.0 / paths));
}

TEST_CASE("larger pure-capture population: mean 367.9") {
  const auto prob = EnergyProblem(single_group_capture(1000.0, 0.01));
  const int paths = 100;
  double s = 0.0;
  for (int p = 0; p < paths; ++p) s += mc_energy_run(prob, 100 + p).observable("n_low").back();
  // sd = sqrt(1000 q (1 - q)) ~ 15.2
  CHECK(std::abs(s / paths - 367.9) < 5 * 15.3 / std::sqrt(paths));
}

TEST_CASE("two-band populations follow the mean balance") {
  const EnergyProblem prob(testing::two_band_params());
  const auto det = run_deterministic(prob);
  const int paths = 200;
  double s1 = 0.0, s2 = 0.0;
  for (int p = 0; p < paths; ++p) {
    const double x = mc_energy_run(prob, 7000 + p).value_at("n_low", 2.0);
    s1 += x;
    s2 += x * x;
  }
  const double mean = s1 / paths;
  const double se = std::sqrt((s2 - paths * mean * mean) / (paths - 1) / paths);
  // Different O(dt) schemes: allow 1% on top of sampling error.
  CHECK(std::abs(mean - det.value_at("n_low", 2.0)) < 4 * se + 0.01 * det.value_at("n_low", 2.0));
}

TEST_CASE("two-band populations: Monte Carlo and SDE ensembles agree") {
  const EnergyProblem prob(testing::two_band_params());
  for (const char* band : {"n_low", "n_high"}) {
    std::vector<double> mc, sde;
    for (int p = 0; p < 200; ++p) {
      mc.push_back(mc_energy_run(prob, 100 + p).value_at(band, 2.0));
      sde.push_back(run_energy(prob, 100 + p).value_at(band, 2.0));
    }
    auto stats = [](const std::vector<double>& x) {
      double m = 0.0, s = 0.0;
      for (double v : x) m += v;
      m /= x.size();
      for (double v : x) s += (v - m) * (v - m);
      return std::pair{m, std::sqrt(s / (x.size() - 1))};
    };
    const auto [m1, s1] = stats(mc);
    const auto [m2, s2] = stats(sde);
    CHECK(std::abs(m1 - m2) < 3 * std::sqrt((s1 * s1 + s2 * s2) / 200));
    CHECK(std::abs(s1 / s2 - 1.0) < 0.35);
  }
}

TEST_CASE("monte carlo validation") {
  CHECK_THROWS_AS(
      mc_slab_run(SlabProblem::homogeneous(4, 4, 1.0, 1.0, 5.0, 5.0, 1.0, 0.0, 1.0, 0.1, 1.0, 0.1), 1),
      UsageError);
  CHECK_THROWS_AS(
      mc_slab_run(SlabProblem::homogeneous(4, 4, 1.0, 1.0, 0.5, 0.5, 1.0, 0.0, 1.0, 0.1, 1.0, 0.0), 1),
      UsageError);
  auto p = single_group_capture(10.5, 0.01);
  CHECK_THROWS_AS(mc_energy_run(EnergyProblem(p), 1), UsageError);
  p = single_group_capture(10.0, 20.0);
  p.t_end = 40.0;
  CHECK_THROWS_AS(mc_energy_run(EnergyProblem(p), 1), UsageError);
}

TEST_CASE("monte carlo runs are reproducible") {
  const auto slab = SlabProblem::homogeneous(8, 4, 2.0, 1.0, 0.6, 0.3, 200.0, 0.0, 1.0, 0.1, 2.0, 0.02);
  CHECK(mc_slab_run(slab, 5).observable("total") == mc_slab_run(slab, 5).observable("total"));
  CHECK(mc_slab_run(slab, 5).observable("total") != mc_slab_run(slab, 6).observable("total"));
}

}  // TEST_SUITE
