#include "ntsde/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "ntsde/errors.hpp"
#include "ntsde/monte_carlo.hpp"
#include "ntsde/rng.hpp"

namespace ntsde {

namespace fs = std::filesystem;

namespace {

std::string path_file(const fs::path& dir, std::size_t index, const char* suffix) {
  char name[48];
  std::snprintf(name, sizeof name, "path_%05zu%s.csv", index, suffix);
  return (dir / name).string();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

void write_snapshots(std::ostream& os, const PathResult& r) {
  os << "t,packet,n\n";
  char buf[64];
  for (const auto& s : r.snapshots) {
    for (Eigen::Index i = 0; i < s.n.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.10g,%td,%.17g\n", s.t, static_cast<std::ptrdiff_t>(i), s.n(i));
      os << buf;
    }
  }
}

}  // namespace

std::uint64_t path_seed(std::uint64_t base, std::size_t index) { return derive_seed(base, index); }

PathResult run_path(const RunConfig& cfg, std::uint64_t seed) {
  switch (cfg.problem) {
    case ProblemKind::slab: {
      const SlabProblem prob = make_slab(cfg);
      if (cfg.method == Method::sde) return run_slab(prob, seed);
      if (cfg.method == Method::mc) return mc_slab_run(prob, seed);
      PathResult r = run_deterministic(prob);
      r.seed = seed;
      return r;
    }
    case ProblemKind::energy: {
      const EnergyProblem prob = make_energy(cfg);
      if (cfg.method == Method::sde) return run_energy(prob, seed);
      if (cfg.method == Method::mc) return mc_energy_run(prob, seed);
      PathResult r = run_deterministic(prob);
      r.seed = seed;
      return r;
    }
    case ProblemKind::general: {
      if (cfg.method == Method::mc) throw UsageError("no Monte Carlo reference for general problems");
      const GeneralProblem prob = make_general(cfg);
      if (cfg.method == Method::sde) return run_general(prob, seed);
      PathResult r = run_deterministic(prob);
      r.seed = seed;
      return r;
    }
  }
  throw UsageError("unknown problem kind");
}

double summary_value(const PathResult& r, const std::string& observable, const RunConfig& cfg) {
  const auto [a, b] = cfg.window();
  if (a == b) return r.value_at(observable, b);
  return r.window_mean(observable, a, b);
}

EnsembleResult run_ensemble(const RunConfig& cfg, const EnsembleOptions& opts) {
  if (cfg.paths < 1) throw UsageError("run_ensemble: paths must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const auto n = static_cast<std::size_t>(cfg.paths);

  EnsembleResult res;
  res.method = to_string(cfg.method);
  res.config_hash = hash_hex(config_hash(cfg));
  res.paths.resize(n);

  const fs::path dir(cfg.output.dir);
  const fs::path path_dir = dir / "paths";
  if (opts.write_files) {
    std::error_code ec;
    fs::create_directories(cfg.output.per_path ? path_dir : dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  }

  // Path 0 runs first on this thread; its layout fixes the observable
  // names, which every path of one configuration shares.
  PathResult first = run_path(cfg, path_seed(cfg.seed, 0));
  res.observables = cfg.output.observables.empty() ? first.names : cfg.output.observables;
  for (const auto& name : res.observables) {
    if (!first.has(name)) throw UsageError("unknown observable '" + name + "' for this problem");
  }

  unsigned workers = opts.workers ? opts.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  res.workers = workers;

  auto record = [&](std::size_t i, const PathResult& r) {
    if (!r.all_finite()) throw InternalError("non-finite observable");
    auto& s = res.paths[i];
    s.seed = r.seed;
    s.clamp_events = r.clamp_events;
    s.clamp_deficit = r.clamp_deficit;
    for (const auto& name : res.observables) s.values.push_back(summary_value(r, name, cfg));
    if (opts.write_files && cfg.output.per_path) {
      auto out = open_out(path_file(path_dir, i, ""));
      r.write_csv(out, res.observables, cfg.output.cadence);
      if (!r.snapshots.empty()) {
        auto snap = open_out(path_file(path_dir, i, "_snapshots"));
        write_snapshots(snap, r);
      }
    }
  };

  std::atomic<std::size_t> next{1};
  std::mutex fail_mutex;
  std::exception_ptr failure;
  std::size_t failed_index = 0;
  auto fail = [&](std::size_t i) {
    std::lock_guard lock(fail_mutex);
    if (!failure || i < failed_index) {
      failure = std::current_exception();
      failed_index = i;
    }
  };
  try {
    record(0, first);
  } catch (...) {
    fail(0);
  }
  first = PathResult{};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      {
        std::lock_guard lock(fail_mutex);
        if (failure) return;
      }
      try {
        record(i, run_path(cfg, path_seed(cfg.seed, i)));
      } catch (...) {
        fail(i);
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const UsageError&) {
      throw;
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& e) {
      throw InternalError("path " + std::to_string(failed_index) + " (seed " +
                          std::to_string(path_seed(cfg.seed, failed_index)) + ") failed: " + e.what());
    }
  }

  for (std::size_t o = 0; o < res.observables.size(); ++o) {
    std::vector<double> values;
    values.reserve(n);
    for (const auto& p : res.paths) values.push_back(p.values[o]);
    res.stats.push_back(summarize(res.observables[o], values));
  }
  for (const auto& p : res.paths) {
    res.clamp_events += p.clamp_events;
    res.clamp_deficit += p.clamp_deficit;
  }
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (opts.write_files) {
    auto summary = open_out((dir / "summary.csv").string());
    write_summary(summary, res);
    auto manifest = open_out((dir / "manifest.txt").string());
    write_manifest(manifest, cfg, res);
  }
  return res;
}

void write_summary(std::ostream& os, const EnsembleResult& r) {
  os << "observable,mean,std,se,n,method,config_hash\n";
  char buf[128];
  for (const auto& s : r.stats) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%zu,", s.mean, s.std, s.se, s.n);
    os << s.name << buf << r.method << ',' << r.config_hash << '\n';
  }
}

void write_manifest(std::ostream& os, const RunConfig& cfg, const EnsembleResult& r) {
  os << "# run manifest\n";
  os << "problem = " << to_string(cfg.problem) << '\n';
  os << serialize(cfg);
  char buf[64];
  os << "result.method = " << r.method << '\n';
  os << "result.config_hash = " << r.config_hash << '\n';
  os << "result.seed_derivation = derive_seed(run.seed, path_index)\n";
  os << "result.paths = " << r.paths.size() << '\n';
  os << "result.clamp_events = " << r.clamp_events << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", r.clamp_deficit);
  os << "result.clamp_deficit = " << buf << '\n';
  const auto [a, b] = cfg.window();
  std::snprintf(buf, sizeof buf, "%.17g, %.17g", a, b);
  os << "result.window = " << buf << '\n';
  os << "result.workers = " << r.workers << '\n';
  std::snprintf(buf, sizeof buf, "%.3f", r.wall_seconds);
  os << "result.wall_seconds = " << buf << '\n';
  for (const auto& s : r.stats) {
    if (s.single_path) os << "warning = single path: std and se of " << s.name << " are not estimates\n";
  }
}

}  // namespace ntsde
