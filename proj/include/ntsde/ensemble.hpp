// Ensemble orchestration: runs independent paths on a worker pool, folds
// per-path summary values in path order, and writes the run artifacts.
//
// Layout under output.dir:
//   summary.csv              observable,mean,std,se,n,method,config_hash
//   manifest.txt             canonical config plus run facts (key = value)
//   paths/path_NNNNN.csv     t,<observable>... per path (output.per_path)
//   paths/path_NNNNN_snapshots.csv   t,packet,n when snapshot times are set
#ifndef NTSDE_ENSEMBLE_HPP
#define NTSDE_ENSEMBLE_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ntsde/config.hpp"
#include "ntsde/path_result.hpp"
#include "ntsde/stats.hpp"

namespace ntsde {

/// Seed of path `index`: derive_seed(base, index). Adding paths never
/// changes the seeds of existing ones.
std::uint64_t path_seed(std::uint64_t base, std::size_t index);

/// One path of the configured problem and method.
PathResult run_path(const RunConfig& cfg, std::uint64_t seed);

struct PathSummary {
  std::uint64_t seed = 0;
  std::vector<double> values;  ///< one per observable, window statistic
  std::size_t clamp_events = 0;
  double clamp_deficit = 0.0;
};

struct EnsembleResult {
  std::vector<std::string> observables;
  EnsembleStats stats;
  std::vector<PathSummary> paths;
  std::size_t clamp_events = 0;
  double clamp_deficit = 0.0;
  double wall_seconds = 0.0;
  unsigned workers = 1;
  std::string method;
  std::string config_hash;
};

struct EnsembleOptions {
  unsigned workers = 0;     ///< 0 = hardware concurrency
  bool write_files = true;  ///< false keeps everything in memory
};

/// Aborts with InternalError naming the path on a non-finite state.
EnsembleResult run_ensemble(const RunConfig& cfg, const EnsembleOptions& opts = {});

/// Window statistic of one observable, as used for the summary.
double summary_value(const PathResult& r, const std::string& observable, const RunConfig& cfg);

void write_summary(std::ostream& os, const EnsembleResult& r);
void write_manifest(std::ostream& os, const RunConfig& cfg, const EnsembleResult& r);

}  // namespace ntsde

#endif  // NTSDE_ENSEMBLE_HPP
