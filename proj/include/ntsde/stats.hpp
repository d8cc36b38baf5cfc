// Per-observable ensemble statistics.
#ifndef NTSDE_STATS_HPP
#define NTSDE_STATS_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace ntsde {

/// Sample mean and standard deviation (n - 1 denominator); se = std / sqrt(n).
struct ObservableStats {
  std::string name;
  double mean = 0.0;
  double std = 0.0;
  double se = 0.0;
  std::size_t n = 0;
  /// Set when n == 1: std and se are reported as 0 but carry no information.
  bool single_path = false;
};

/// Folds values in the given order (Welford), so results depend only on
/// the order of `values`, never on how they were produced.
ObservableStats summarize(std::string name, const std::vector<double>& values);

using EnsembleStats = std::vector<ObservableStats>;

}  // namespace ntsde

#endif  // NTSDE_STATS_HPP
