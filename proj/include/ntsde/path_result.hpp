// Time series produced by one sample path of any solver.
#ifndef NTSDE_PATH_RESULT_HPP
#define NTSDE_PATH_RESULT_HPP

#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ntsde {

struct Snapshot {
  double t = 0.0;
  Eigen::VectorXd n;
};

/// Observables share one time axis. Per-step rates (leakage, capture) are
/// stamped with the step's end time t_{k+1}; state totals of the energy
/// solvers include t = 0.
struct PathResult {
  std::vector<double> time;
  std::vector<std::string> names;
  std::deque<std::vector<double>> series;  // stable references across add_series
  std::vector<Snapshot> snapshots;
  std::size_t clamp_events = 0;
  double clamp_deficit = 0.0;
  std::uint64_t seed = 0;

  std::vector<double>& add_series(std::string name);
  bool has(std::string_view name) const;
  const std::vector<double>& observable(std::string_view name) const;

  /// Mean of a per-step series over steps whose time stamp lies in
  /// (t0, t1], with a 1e-9 relative guard on the window edges. For leakage
  /// rates this is the number leaked in the window divided by its length.
  double window_mean(std::string_view name, double t0, double t1) const;

  /// Value at the sample whose time is closest to t.
  double value_at(std::string_view name, double t) const;

  bool all_finite() const;

  /// `t,<name>...` rows; `columns` selects and orders observables (all if
  /// empty); every `cadence`-th row is written, always including the last.
  void write_csv(std::ostream& os, const std::vector<std::string>& columns = {},
                 std::size_t cadence = 1) const;
};

}  // namespace ntsde

#endif  // NTSDE_PATH_RESULT_HPP
