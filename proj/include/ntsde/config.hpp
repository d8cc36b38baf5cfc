// Run configuration: flat `section.key = value` text.
//
//   # comment
//   run.method = sde            sde | mc | deterministic
//   run.paths  = 100
//   run.seed   = 20240601
//   slab.sigma_s = 80*5.0       lists are comma separated; n*v repeats v
//
// Exactly one of the slab., energy. or general. sections must be present.
// Physics keys have no defaults; run.* and output.* keys do. Unknown and
// duplicate keys are errors.
#ifndef NTSDE_CONFIG_HPP
#define NTSDE_CONFIG_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ntsde/grid.hpp"
#include "ntsde/material.hpp"
#include "ntsde/sde.hpp"

namespace ntsde {

enum class ProblemKind { slab, energy, general };
enum class Method { sde, mc, deterministic };

const char* to_string(ProblemKind k);
const char* to_string(Method m);
const char* to_string(ClampPolicy c);

struct FaceSpec {
  BoundaryKind kind = BoundaryKind::vacuum;
  double rate = 0.0;
  double t_on = 0.0;
  double t_off = 0.0;
};

/// Uniform medium on a small phase-space grid with an isotropic energy
/// kernel: sigma' f = kernel(g', g) / (4 pi).
struct GeneralSpec {
  GridCounts counts{};
  GridExtents extents{};
  Eigen::ArrayXd speed;
  Eigen::ArrayXd sigma_total;
  Eigen::ArrayXd sigma_capture;
  Eigen::MatrixXd kernel;  ///< per unit energy, row = incoming group
  Eigen::ArrayXd source;   ///< Q per unit volume, solid angle, energy, time
  double source_t_on = 0.0;
  double source_t_off = 0.0;
  bool conservative = false;
  std::array<FaceSpec, 6> faces{};
  double initial = 0.0;  ///< count in every packet at t = 0
  double dt = 0.0;
  double t_end = 0.0;
  ClampPolicy clamp = ClampPolicy::rates_only;
};

struct OutputOptions {
  std::string dir = "out";
  std::vector<std::string> observables;  ///< empty = all
  std::size_t cadence = 1;
  /// Summary statistic per path: window mean over (start, end], or the
  /// value at `end` when start == end. Unset means the problem's default.
  std::optional<double> window_start;
  std::optional<double> window_end;
  std::vector<double> snapshot_times;
  bool per_path = true;
};

struct RunConfig {
  ProblemKind problem = ProblemKind::slab;
  Method method = Method::sde;
  int paths = 1;
  std::uint64_t seed = 1;
  SlabParams slab;
  EnergyParams energy;
  GeneralSpec general;
  OutputOptions output;

  double t_end() const;
  /// Resolved summary window: slab and general default to (t_end - 1,
  /// t_end], energy to the value at t_end.
  std::pair<double, double> window() const;
};

RunConfig parse_config(std::istream& is, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

/// Canonical text: fixed key order, %.17g numbers, repeated values folded
/// as n*v. parse_config(serialize(c)) equals c.
std::string serialize(const RunConfig& cfg);
/// FNV-1a 64 of the canonical problem section (run.* and output.* lines
/// excluded), so every method and ensemble size on one problem shares it.
std::uint64_t config_hash(const RunConfig& cfg);
std::string hash_hex(std::uint64_t h);

bool operator==(const RunConfig& a, const RunConfig& b);

SlabProblem make_slab(const RunConfig& cfg);
EnergyProblem make_energy(const RunConfig& cfg);
GeneralProblem make_general(const RunConfig& cfg);

/// Key/value store of one config file that remembers which keys were
/// read, so leftovers can be rejected as unknown.
class ConfigEntries {
 public:
  ConfigEntries(std::map<std::string, std::pair<std::string, int>> kv, std::string origin);

  bool has(const std::string& key) const;
  bool has_prefix(const std::string& prefix) const;
  /// "file:line (key)" for messages.
  std::string where(const std::string& key) const;

  const std::string& raw(const std::string& key);
  std::string text(const std::string& key);
  double real(const std::string& key);
  double real_or(const std::string& key, double fallback);
  long long integer(const std::string& key);
  int count(const std::string& key);  ///< integer >= 1
  std::uint64_t unsigned64(const std::string& key);
  bool boolean(const std::string& key);
  /// Exactly n values; a single value is broadcast.
  Eigen::ArrayXd array(const std::string& key, Eigen::Index n);
  std::vector<double> list(const std::string& key);
  /// rates_only when absent.
  ClampPolicy clamp(const std::string& key);

  void reject_unused() const;

 private:
  std::map<std::string, std::pair<std::string, int>> kv_;
  std::set<std::string> used_;
  std::string origin_;
};

/// `key = value` lines, `#` comments; duplicates are errors.
ConfigEntries read_entries(std::istream& is, const std::string& origin);

/// Parses one list value with the n*v shorthand.
std::vector<double> parse_list(const std::string& text);

}  // namespace ntsde

#endif  // NTSDE_CONFIG_HPP
