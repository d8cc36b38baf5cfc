// ntsde: command-line driver for ensembles, comparisons, perturbation
// tables, sheet diagnostics and figure data.
//
// Exit status: 0 success, 1 compare found |z| above the threshold,
// 2 usage or configuration error, 3 internal or I/O failure.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ntsde/config.hpp"
#include "ntsde/ensemble.hpp"
#include "ntsde/errors.hpp"
#include "ntsde/monte_carlo.hpp"
#include "ntsde/perturbation.hpp"
#include "ntsde/report.hpp"
#include "ntsde/rng.hpp"
#include "ntsde/sheets.hpp"

using namespace ntsde;

namespace {

struct RunFlags {
  std::string config;
  std::optional<int> paths;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool deterministic = false;
  unsigned workers = 0;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool allow_deterministic) {
  cmd->add_option("--config", f.config, "run configuration file")->required();
  cmd->add_option("--paths", f.paths, "number of sample paths (overrides run.paths)");
  cmd->add_option("--seed", f.seed, "base seed (overrides run.seed)");
  cmd->add_option("--out", f.out, "output directory (overrides output.dir)");
  cmd->add_option("--workers", f.workers, "worker threads, 0 = all cores");
  if (allow_deterministic) cmd->add_flag("--deterministic", f.deterministic, "switch the noise off");
}

RunConfig resolve(const RunFlags& f, ProblemKind kind, Method method) {
  RunConfig cfg = load_config(f.config);
  if (cfg.problem != kind) {
    throw UsageError(f.config + ": problem kind is " + std::string(to_string(cfg.problem)) + ", this command needs " +
                     to_string(kind));
  }
  cfg.method = f.deterministic ? Method::deterministic : method;
  if (f.paths) {
    if (*f.paths < 1) throw UsageError("--paths must be >= 1");
    cfg.paths = *f.paths;
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.output.dir = *f.out;
  if (cfg.method == Method::mc) {
    const double mc_dt = kind == ProblemKind::slab ? cfg.slab.mc_dt : cfg.energy.mc_dt;
    if (!(mc_dt > 0)) throw UsageError(f.config + ": Monte Carlo runs need mc_dt > 0");
  }
  return cfg;
}

int run_command(const RunFlags& f, ProblemKind kind, Method method) {
  const RunConfig cfg = resolve(f, kind, method);
  const EnsembleResult r = run_ensemble(cfg, {f.workers, true});
  std::printf("%s %s: %zu paths, %.2f s, %zu negative-count events, config %s\n", to_string(cfg.problem),
              r.method.c_str(), r.paths.size(), r.wall_seconds, r.clamp_events, r.config_hash.c_str());
  const auto [a, b] = cfg.window();
  if (a == b) {
    std::printf("value at t = %g\n", b);
  } else {
    std::printf("window (%g, %g]\n", a, b);
  }
  std::printf("%-16s %14s %12s %10s %6s\n", "observable", "mean", "std", "se", "n");
  for (const auto& s : r.stats) {
    std::printf("%-16s %14.4f %12.4f %10.4f %6zu%s\n", s.name.c_str(), s.mean, s.std, s.se, s.n,
                s.single_path ? "  (single path: std not estimated)" : "");
  }
  std::printf("wrote %s/summary.csv\n", cfg.output.dir.c_str());
  return 0;
}

struct CompareFlags {
  std::string a, b;
  double threshold = 3.0;
  std::optional<std::string> out;
};

int compare_command(const CompareFlags& f) {
  const auto a = read_summary_file(f.a);
  const auto b = read_summary_file(f.b);
  const Comparison c = compare(a, b, f.threshold);
  if (!a.empty() && !b.empty() && a.front().config_hash != b.front().config_hash) {
    std::cerr << "note: the summaries come from different problem configurations\n";
  }
  write_comparison(std::cout, c);
  if (f.out) {
    std::ofstream out(*f.out, std::ios::binary);
    if (!out) throw IoError("cannot write '" + *f.out + "'");
    write_comparison(out, c);
  }
  return c.pass() ? 0 : 1;
}

struct PerturbFlags {
  std::string config;
  std::optional<std::string> out;
};

RateFunction rate_from(ConfigEntries& e, const std::string& key, const std::filesystem::path& base) {
  const bool constant = e.has("perturb." + key);
  const bool table = e.has("perturb." + key + "_table");
  if (constant == table) throw UsageError("perturb: give exactly one of perturb." + key + " and perturb." + key + "_table");
  if (constant) {
    const double r = e.real("perturb." + key);
    if (!(r >= 0)) throw UsageError(e.where("perturb." + key) + ": rate must be >= 0");
    return [r](double, double) { return r; };
  }
  std::filesystem::path file = e.text("perturb." + key + "_table");
  if (file.is_relative()) file = base / file;
  std::ifstream in(file);
  if (!in) throw IoError("cannot read rate table '" + file.string() + "'");
  auto t = std::make_shared<RateTable>(RateTable::read_csv(in));
  return [t](double energy, double time) { return (*t)(energy, time); };
}

int perturb_command(const PerturbFlags& f) {
  std::ifstream in(f.config);
  if (!in) throw IoError("cannot open config file '" + f.config + "'");
  ConfigEntries e = read_entries(in, f.config);
  const auto base = std::filesystem::path(f.config).parent_path();
  CaptureHistory hist;
  hist.rate = rate_from(e, "rate", base);
  hist.perturbed = rate_from(e, "perturbed_rate", base);
  const double density = e.real("perturb.initial_density");
  if (!(density >= 0)) throw UsageError("perturb.initial_density must be >= 0");
  hist.initial = [density](double) { return density; };
  hist.e_max = e.real("perturb.e_max");
  const double t_end = e.real("perturb.t_end");
  const double t_step = e.real("perturb.t_step");
  if (!(t_end > 0) || !(t_step > 0)) throw UsageError("perturb.t_end and perturb.t_step must be > 0");
  Quadrature q;
  if (e.has("perturb.energy_intervals")) q.energy_intervals = e.count("perturb.energy_intervals");
  if (e.has("perturb.time_intervals")) q.time_intervals = e.count("perturb.time_intervals");
  std::string dir = e.has("output.dir") ? e.text("output.dir") : "out";
  e.reject_unused();
  if (f.out) dir = *f.out;

  std::filesystem::create_directories(dir);
  const std::string file = (std::filesystem::path(dir) / "perturb.csv").string();
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write '" + file + "'");
  out << "t,delta_mean,delta_variance\n";
  const auto steps = static_cast<long>(std::llround(t_end / t_step));
  char buf[96];
  for (long k = 0; k <= steps; ++k) {
    const double t = std::min(k * t_step, t_end);
    std::snprintf(buf, sizeof buf, "%.10g,%.17g,%.17g\n", t, delta_mean(hist, t, q), delta_variance(hist, t, q));
    out << buf;
  }
  std::printf("wrote %s (%ld rows)\n", file.c_str(), steps + 1);
  return 0;
}

struct SheetFlags {
  std::uint64_t seed = 1;
  std::string out = "out";
  int nx = 100;
  int nt = 100;
  double extent = 5.0;
  long draws = 1000000;
  double area = 0.5;
};

int sheet_command(const SheetFlags& f) {
  if (f.draws < 2) throw UsageError("--draws must be >= 2");
  SheetSampler sampler(f.seed, 2, {f.extent / f.nx, f.extent / f.nt});
  SheetSampler field = sampler.split(0);
  const SheetSurface surface = sample_surface(field, f.nx, f.nt, f.extent, f.extent);
  std::filesystem::create_directories(f.out);
  const std::string file = (std::filesystem::path(f.out) / "sheet.csv").string();
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write '" + file + "'");
  surface.write_csv(out);

  SheetSampler rect = sampler.split(1);
  SheetSampler prod = sampler.split(2);
  const double side = std::sqrt(f.area);
  double r2 = 0, r4 = 0, p4 = 0;
  for (long i = 0; i < f.draws; ++i) {
    const double w = rectangle_increment(rect, f.area);
    const double u = wiener_product_increment(prod, side, side);
    r2 += w * w;
    r4 += w * w * w * w;
    p4 += u * u * u * u;
  }
  const double n = static_cast<double>(f.draws);
  const std::string stats = (std::filesystem::path(f.out) / "sheet_moments.txt").string();
  std::ofstream ms(stats, std::ios::binary);
  if (!ms) throw IoError("cannot write '" + stats + "'");
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "area = %.17g\ndraws = %ld\nsecond_moment_ratio = %.6f\nfourth_moment_ratio = %.6f\n"
                "product_fourth_moment_ratio = %.6f\n",
                f.area, f.draws, r2 / n / f.area, r4 / n / (3 * f.area * f.area),
                p4 / n / (9 * f.area * f.area));
  ms << buf;
  std::cout << buf;
  std::printf("wrote %s and %s\n", file.c_str(), stats.c_str());
  return 0;
}

struct FigureFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

int figures_command(const FigureFlags& f) {
  RunConfig cfg = load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.output.dir = *f.out;
  const std::uint64_t seed = path_seed(cfg.seed, 0);
  std::vector<FigureInput> inputs;
  for (Method m : {Method::sde, Method::mc, Method::deterministic}) {
    if (m == Method::mc) {
      if (cfg.problem == ProblemKind::general) continue;
      const double mc_dt = cfg.problem == ProblemKind::slab ? cfg.slab.mc_dt : cfg.energy.mc_dt;
      if (!(mc_dt > 0)) continue;
    }
    cfg.method = m;
    inputs.push_back({to_string(m), run_path(cfg, seed)});
  }
  for (const auto& file : emit_figures(inputs, cfg.problem, cfg.output.dir, to_string(cfg.problem))) {
    std::printf("wrote %s\n", file.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic neutron transport laboratory"};
  app.require_subcommand(1);

  RunFlags slab_f, energy_f, general_f, mcs_f, mce_f;
  auto* run_slab_cmd = app.add_subcommand("run-slab", "SDE ensemble of a slab problem");
  add_run_flags(run_slab_cmd, slab_f, true);
  auto* run_energy_cmd = app.add_subcommand("run-energy", "SDE ensemble of an energy-group problem");
  add_run_flags(run_energy_cmd, energy_f, true);
  auto* run_general_cmd = app.add_subcommand("run-general", "SDE ensemble on a general phase-space grid");
  add_run_flags(run_general_cmd, general_f, true);
  auto* mc_slab_cmd = app.add_subcommand("mc-slab", "Monte Carlo ensemble of a slab problem");
  add_run_flags(mc_slab_cmd, mcs_f, false);
  auto* mc_energy_cmd = app.add_subcommand("mc-energy", "Monte Carlo ensemble of an energy-group problem");
  add_run_flags(mc_energy_cmd, mce_f, false);

  CompareFlags cmp_f;
  auto* compare_cmd = app.add_subcommand("compare", "z-scores of two summary.csv files");
  compare_cmd->add_option("a", cmp_f.a, "first summary.csv")->required();
  compare_cmd->add_option("b", cmp_f.b, "second summary.csv")->required();
  compare_cmd->add_option("--threshold", cmp_f.threshold, "largest accepted |z|");
  compare_cmd->add_option("--out", cmp_f.out, "also write the table to this file");

  PerturbFlags pert_f;
  auto* perturb_cmd = app.add_subcommand("perturb", "mean and variance shifts under a capture perturbation");
  perturb_cmd->add_option("--config", pert_f.config, "perturbation configuration file")->required();
  perturb_cmd->add_option("--out", pert_f.out, "output directory");

  SheetFlags sheet_f;
  auto* sheet_cmd = app.add_subcommand("sheet-demo", "Brownian sheet surface and moment diagnostics");
  sheet_cmd->add_option("--seed", sheet_f.seed, "seed");
  sheet_cmd->add_option("--out", sheet_f.out, "output directory");
  sheet_cmd->add_option("--nx", sheet_f.nx, "lattice cells along x")->check(CLI::PositiveNumber);
  sheet_cmd->add_option("--nt", sheet_f.nt, "lattice cells along t")->check(CLI::PositiveNumber);
  sheet_cmd->add_option("--extent", sheet_f.extent, "side of the square domain")->check(CLI::PositiveNumber);
  sheet_cmd->add_option("--draws", sheet_f.draws, "draws for the moment diagnostics");
  sheet_cmd->add_option("--area", sheet_f.area, "rectangle area for the diagnostics")->check(CLI::PositiveNumber);

  FigureFlags fig_f;
  auto* figures_cmd = app.add_subcommand("figures", "single-path figure data for every method");
  figures_cmd->add_option("--config", fig_f.config, "run configuration file")->required();
  figures_cmd->add_option("--seed", fig_f.seed, "base seed (path 0 is drawn)");
  figures_cmd->add_option("--out", fig_f.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_slab_cmd) return run_command(slab_f, ProblemKind::slab, Method::sde);
    if (*run_energy_cmd) return run_command(energy_f, ProblemKind::energy, Method::sde);
    if (*run_general_cmd) return run_command(general_f, ProblemKind::general, Method::sde);
    if (*mc_slab_cmd) return run_command(mcs_f, ProblemKind::slab, Method::mc);
    if (*mc_energy_cmd) return run_command(mce_f, ProblemKind::energy, Method::mc);
    if (*compare_cmd) return compare_command(cmp_f);
    if (*perturb_cmd) return perturb_command(pert_f);
    if (*sheet_cmd) return sheet_command(sheet_f);
    if (*figures_cmd) return figures_command(fig_f);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
