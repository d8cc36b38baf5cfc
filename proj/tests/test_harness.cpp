#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "ntsde/config.hpp"
#include "ntsde/ensemble.hpp"
#include "ntsde/errors.hpp"
#include "ntsde/report.hpp"
#include "ntsde/stats.hpp"

using namespace ntsde;
namespace fs = std::filesystem;

namespace {

const std::string kSmallSlab = R"(# small slab
run.paths = 4
run.seed = 99
slab.cells = 6
slab.directions = 4
slab.x_max = 1.0
slab.speed = 1.0
slab.sigma_s = 3*0.5, 3*0.8
slab.sigma_c = 0.2
slab.influx = 40
slab.t_on = 0
slab.t_off = 1
slab.dt = 0.1
slab.t_end = 2
slab.mc_dt = 0.02
output.window_start = 1
output.window_end = 2
)";

RunConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is, "test");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Fresh scratch directory under the system temp dir.
fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ntsde_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

SummaryRow row(std::string name, double mean, double std, std::size_t n, std::string method = "sde") {
  return {std::move(name), mean, std, std / std::sqrt(static_cast<double>(n)), n, std::move(method), "h"};
}

}  // namespace

TEST_SUITE("harness-cli") {

TEST_CASE("summary statistics") {
  const auto s = summarize("x", {1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == 2.5);
  CHECK(s.std == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
  CHECK(s.se == doctest::Approx(s.std / 2.0).epsilon(1e-15));
  CHECK(s.n == 4);
  CHECK_FALSE(s.single_path);
  const auto one = summarize("y", {7.0});
  CHECK(one.mean == 7.0);
  CHECK(one.std == 0.0);
  CHECK(one.se == 0.0);
  CHECK(one.single_path);
  const auto same = summarize("z", std::vector<double>(10, 0.1));
  CHECK(same.std == 0.0);
}

TEST_CASE("config parsing, round trip and hashing") {
  const auto cfg = parse(kSmallSlab);
  CHECK(cfg.problem == ProblemKind::slab);
  CHECK(cfg.method == Method::sde);
  CHECK(cfg.paths == 4);
  CHECK(cfg.slab.sigma_s.size() == 6);
  CHECK(cfg.slab.sigma_s(4) == 0.8);
  CHECK(cfg.output.dir == "out");
  CHECK(cfg.window() == std::pair<double, double>{1.0, 2.0});

  const auto again = parse(serialize(cfg));
  CHECK(again == cfg);
  CHECK(serialize(again) == serialize(cfg));
  CHECK(config_hash(again) == config_hash(cfg));

  auto mc = cfg;
  mc.method = Method::mc;
  mc.paths = 50;
  mc.output.dir = "elsewhere";
  CHECK(config_hash(mc) == config_hash(cfg));
  auto other = cfg;
  other.slab.influx = 41;
  CHECK(config_hash(other) != config_hash(cfg));
  CHECK(hash_hex(config_hash(cfg)).size() == 16);
}

TEST_CASE("shipped configs load and round trip") {
  for (const char* name : {"slab.cfg", "energy.cfg", "general.cfg"}) {
    const auto cfg = load_config(std::string(NTSDE_CONFIG_DIR) + "/" + name);
    CHECK(parse(serialize(cfg)) == cfg);
  }
  const auto energy = load_config(std::string(NTSDE_CONFIG_DIR) + "/energy.cfg");
  CHECK(energy.window() == std::pair<double, double>{2.0, 2.0});
  CHECK(energy.energy.kernel(15, 3) == 0.045);
  CHECK(energy.energy.kernel(3, 15) == 0.0);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse(kSmallSlab + "slab.colour = red\n"), UsageError);
  CHECK_THROWS_AS(parse(kSmallSlab + "slab.cells = 7\n"), UsageError);
  CHECK_THROWS_AS(parse(kSmallSlab + "run.paths = 0\n"), UsageError);
  CHECK_THROWS_AS(parse(kSmallSlab + "run.method = magic\n"), UsageError);
  CHECK_THROWS_AS(parse(kSmallSlab + "energy.groups = 2\n"), UsageError);
  CHECK_THROWS_AS(parse("slab.cells = 6\n"), UsageError);  // physics keys have no defaults
  std::string no_speed = kSmallSlab;
  no_speed.erase(no_speed.find("slab.speed"), std::string("slab.speed = 1.0\n").size());
  CHECK_THROWS_AS(parse(no_speed), UsageError);
  std::string fast = kSmallSlab;
  fast.replace(fast.find("slab.speed = 1.0"), 16, "slab.speed = 9.0");
  CHECK_THROWS_AS(parse(fast), UsageError);  // CFL
  CHECK_THROWS_AS(parse(kSmallSlab + "slab.x_max = abc\n"), UsageError);
  CHECK_THROWS_AS(load_config("/nonexistent/ntsde.cfg"), IoError);
}

TEST_CASE("list shorthand") {
  CHECK(parse_list("1, 2*3.5, 0") == std::vector<double>{1.0, 3.5, 3.5, 0.0});
  CHECK(parse_list("4*0") == std::vector<double>(4, 0.0));
  CHECK_THROWS_AS(parse_list("0*1"), UsageError);
  CHECK_THROWS_AS(parse_list("1,,2"), UsageError);
}

TEST_CASE("deterministic ensemble: identical paths, zero spread") {
  auto cfg = parse(kSmallSlab);
  cfg.method = Method::deterministic;
  cfg.paths = 3;
  const fs::path dir = scratch("det");
  cfg.output.dir = dir.string();
  const auto r = run_ensemble(cfg, {2, true});
  for (const auto& s : r.stats) {
    CHECK(s.std == 0.0);
    CHECK(s.se == 0.0);
    CHECK(s.n == 3);
  }
  const std::string p0 = slurp(dir / "paths" / "path_00000.csv");
  CHECK(!p0.empty());
  CHECK(p0 == slurp(dir / "paths" / "path_00001.csv"));
  CHECK(p0 == slurp(dir / "paths" / "path_00002.csv"));
  fs::remove_all(dir);
}

TEST_CASE("single-path ensemble flags its statistics") {
  auto cfg = parse(kSmallSlab);
  cfg.paths = 1;
  const auto r = run_ensemble(cfg, {1, false});
  for (const auto& s : r.stats) CHECK(s.single_path);
  std::ostringstream manifest;
  write_manifest(manifest, cfg, r);
  CHECK(manifest.str().find("single path") != std::string::npos);
}

TEST_CASE("ensembles are byte-identical across reruns and worker counts") {
  for (Method m : {Method::sde, Method::mc}) {
    auto cfg = parse(kSmallSlab);
    cfg.method = m;
    cfg.paths = 6;
    cfg.output.dir = scratch("w1").string();
    run_ensemble(cfg, {1, true});
    const fs::path a = cfg.output.dir;
    cfg.output.dir = scratch("w4").string();
    run_ensemble(cfg, {4, true});
    const fs::path b = cfg.output.dir;
    CHECK(slurp(a / "summary.csv") == slurp(b / "summary.csv"));
    for (int i = 0; i < 6; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "path_%05d.csv", i);
      CHECK(slurp(a / "paths" / name) == slurp(b / "paths" / name));
    }
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST_CASE("adding paths leaves existing paths unchanged") {
  auto cfg = parse(kSmallSlab);
  cfg.paths = 3;
  const auto small = run_ensemble(cfg, {2, false});
  cfg.paths = 5;
  const auto large = run_ensemble(cfg, {3, false});
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(small.paths[i].seed == large.paths[i].seed);
    CHECK(small.paths[i].values == large.paths[i].values);
  }
  CHECK(path_seed(99, 2) == large.paths[2].seed);
}

TEST_CASE("ensemble rejects unknown observables and unsupported methods") {
  auto cfg = parse(kSmallSlab);
  cfg.output.observables = {"left_leakage", "nope"};
  CHECK_THROWS_AS(run_ensemble(cfg, {1, false}), UsageError);
  auto general = load_config(std::string(NTSDE_CONFIG_DIR) + "/general.cfg");
  general.method = Method::mc;
  CHECK_THROWS_AS(run_path(general, 1), UsageError);
}

TEST_CASE("summary file round trip") {
  auto cfg = parse(kSmallSlab);
  const auto r = run_ensemble(cfg, {2, false});
  std::stringstream ss;
  write_summary(ss, r);
  CHECK(ss.str().rfind("observable,mean,std,se,n,method,config_hash\n", 0) == 0);
  const auto rows = read_summary(ss);
  REQUIRE(rows.size() == r.stats.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].observable == r.stats[i].name);
    CHECK(rows[i].mean == r.stats[i].mean);
    CHECK(rows[i].std == r.stats[i].std);
    CHECK(rows[i].n == 4);
    CHECK(rows[i].method == "sde");
    CHECK(rows[i].config_hash == hash_hex(config_hash(cfg)));
  }
  std::istringstream bad("mean,std\n1,2\n");
  CHECK_THROWS_AS(read_summary(bad), UsageError);
}

TEST_CASE("z-scores and comparison verdicts") {
  // 704.93 +- 23.01 vs 694.32 +- 21.05 over 100 paths each.
  const double z_left = z_score(704.93, 23.01 / 10, 694.32, 21.05 / 10);
  CHECK(z_left == doctest::Approx(10.61 / std::sqrt(23.01 * 23.01 / 100 + 21.05 * 21.05 / 100)));
  CHECK(z_left == doctest::Approx(3.40).epsilon(2e-3));
  // 156.83 +- 11.44 vs 156.97 +- 10.28.
  CHECK(std::abs(z_score(156.83, 1.144, 156.97, 1.028)) == doctest::Approx(0.09).epsilon(0.02));
  CHECK(z_score(5.0, 0.0, 5.0, 0.0) == 0.0);
  CHECK(z_score(5.0, 0.0, 6.0, 0.0) == -std::numeric_limits<double>::infinity());

  const std::vector<SummaryRow> a{row("left_leakage", 704.93, 23.01, 100, "mc"),
                                  row("right_leakage", 100.22, 8.0, 100, "mc")};
  const std::vector<SummaryRow> b{row("right_leakage", 106.75, 7.57, 100),
                                  row("left_leakage", 694.32, 21.05, 100)};
  const auto c3 = compare(a, b);
  REQUIRE(c3.rows.size() == 2);
  CHECK(c3.rows[0].observable == "left_leakage");
  CHECK(c3.rows[0].z == doctest::Approx(3.40).epsilon(2e-3));
  CHECK_FALSE(c3.pass());
  CHECK(compare(a, b, 6.0).pass());
  const auto same = compare(a, a);
  for (const auto& r : same.rows) CHECK(r.z == 0.0);
  CHECK(same.pass());

  std::ostringstream os;
  write_comparison(os, c3);
  CHECK(os.str().rfind("observable,method_a,mean_a,std_a,n_a,method_b,mean_b,std_b,n_b,z,verdict\n", 0) == 0);
  CHECK(os.str().find(",differ") != std::string::npos);

  const std::vector<SummaryRow> other{row("left_leakage", 1, 1, 10), row("capture_rate", 1, 1, 10)};
  CHECK_THROWS_AS(compare(a, other), UsageError);
  CHECK_THROWS_AS(compare(a, {a[0]}), UsageError);
}

TEST_CASE("figure bundles") {
  const fs::path dir = scratch("fig");
  auto slab = parse(kSmallSlab);
  std::vector<FigureInput> in;
  slab.method = Method::sde;
  in.push_back({"sde", run_path(slab, 1)});
  slab.method = Method::mc;
  in.push_back({"mc", run_path(slab, 1)});
  const auto files = emit_figures(in, ProblemKind::slab, dir.string(), "slab");
  REQUIRE(files.size() == 2);
  auto header = [](const std::string& file) {
    std::ifstream f(file);
    std::string h;
    std::getline(f, h);
    return h;
  };
  CHECK(header(files[0]) == "t,left_leakage,right_leakage");
  CHECK(header(files[1]) == header(files[0]));

  auto energy = load_config(std::string(NTSDE_CONFIG_DIR) + "/energy.cfg");
  energy.method = Method::sde;
  const auto efiles = emit_figures({{"sde", run_path(energy, 3)}}, ProblemKind::energy, dir.string(), "energy");
  std::ifstream f(efiles.at(0));
  std::string line;
  std::getline(f, line);
  CHECK(line == "t,n_low,n_high");
  std::size_t rows = 0;
  while (std::getline(f, line)) ++rows;
  CHECK(rows == static_cast<std::size_t>(std::llround(energy.energy.t_end / energy.energy.dt)) + 1);

  CHECK_THROWS_AS(emit_figures({{"sde", run_path(energy, 3)}}, ProblemKind::slab, dir.string(), "x"), UsageError);
  fs::remove_all(dir);
}

TEST_CASE("deterministic slab leakage matches the golden curve") {
  const auto cfg = load_config(std::string(NTSDE_CONFIG_DIR) + "/slab.cfg");
  const auto r = run_deterministic(make_slab(cfg));
  std::ifstream golden(std::string(NTSDE_GOLDEN_DIR) + "/slab_deterministic.csv");
  REQUIRE(golden);
  std::string line;
  std::getline(golden, line);
  CHECK(line == "t,left_leakage,right_leakage");
  std::size_t rows = 0;
  while (std::getline(golden, line)) {
    double t, left, right;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &left, &right) == 3);
    CHECK(r.value_at("left_leakage", t) == doctest::Approx(left).epsilon(1e-9));
    CHECK(r.value_at("right_leakage", t) == doctest::Approx(right).epsilon(1e-9));
    ++rows;
  }
  CHECK(rows == 101);

  // Shape: left leakage rises while the influx is on, then decays.
  const auto& left = r.observable("left_leakage");
  for (std::size_t k = 1; k < left.size(); ++k) {
    if (r.time[k] <= 50.0) CHECK(left[k] >= left[k - 1]);
    if (r.time[k] > 51.0) CHECK(left[k] < left[k - 1]);
  }
  const double plateau = r.window_mean("left_leakage", 49, 50);
  CHECK(plateau > 660.0);
  CHECK(plateau < 740.0);
}

}  // TEST_SUITE
