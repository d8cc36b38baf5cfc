#include "ntsde/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "ntsde/errors.hpp"

namespace ntsde {

namespace {

constexpr std::array<const char*, 6> kFaces{"x_lo", "x_hi", "y_lo", "y_hi", "z_lo", "z_hi"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used == t.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError(what + ": '" + t + "' is not a number");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const double* data, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n;) {
    std::size_t run = 1;
    while (i + run < n && data[i + run] == data[i]) ++run;
    if (!out.empty()) out += ", ";
    out += run > 1 ? std::to_string(run) + "*" + fmt(data[i]) : fmt(data[i]);
    i += run;
  }
  return out;
}

std::string fmt_list(const Eigen::ArrayXd& a) { return fmt_list(a.data(), static_cast<std::size_t>(a.size())); }
std::string fmt_list(const std::vector<double>& a) { return fmt_list(a.data(), a.size()); }

std::string fmt_matrix(const Eigen::MatrixXd& m) {
  std::vector<double> rows;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) rows.push_back(m(i, j));
  }
  return fmt_list(rows);
}

void parse_slab(ConfigEntries& e, SlabParams& p) {
  p.cells = e.count("slab.cells");
  p.directions = e.count("slab.directions");
  p.x_max = e.real("slab.x_max");
  p.speed = e.real("slab.speed");
  p.sigma_s = e.array("slab.sigma_s", p.cells);
  p.sigma_c = e.array("slab.sigma_c", p.cells);
  p.influx = e.real("slab.influx");
  p.t_on = e.real("slab.t_on");
  p.t_off = e.real("slab.t_off");
  p.dt = e.real("slab.dt");
  p.t_end = e.real("slab.t_end");
  p.mc_dt = e.real_or("slab.mc_dt", 0.0);
  p.clamp = e.clamp("slab.clamp");
}

void parse_energy(ConfigEntries& e, EnergyParams& p) {
  const int g = p.groups = e.count("energy.groups");
  p.e_max = e.real("energy.e_max");
  p.v_sigma = e.array("energy.v_sigma", g);
  p.v_sigma_c = e.array("energy.v_sigma_c", g);
  const bool full = e.has("energy.kernel");
  const bool uniform = e.has("energy.kernel_uniform");
  if (full == uniform) {
    throw UsageError("energy: give exactly one of energy.kernel and energy.kernel_uniform");
  }
  if (full) {
    const Eigen::ArrayXd flat = e.array("energy.kernel", static_cast<Eigen::Index>(g) * g);
    p.kernel = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        flat.data(), g, g);
  } else {
    p.kernel = e.array("energy.kernel_uniform", g).matrix().replicate(1, g);
  }
  p.source = e.array("energy.source", g);
  p.initial = e.array("energy.initial", g);
  p.dt = e.real("energy.dt");
  p.t_end = e.real("energy.t_end");
  p.mc_dt = e.real_or("energy.mc_dt", 0.0);
  p.band_split = e.real("energy.band_split");
  p.clamp = e.clamp("energy.clamp");
}

BoundaryKind boundary_kind(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  if (t == "vacuum") return BoundaryKind::vacuum;
  if (t == "reflecting") return BoundaryKind::reflecting;
  if (t == "inflow") return BoundaryKind::inflow;
  throw UsageError(where + ": expected vacuum, reflecting or inflow");
}

const char* to_string(BoundaryKind k) {
  switch (k) {
    case BoundaryKind::vacuum: return "vacuum";
    case BoundaryKind::reflecting: return "reflecting";
    case BoundaryKind::inflow: return "inflow";
  }
  return "?";
}

void parse_general(ConfigEntries& e, GeneralSpec& s) {
  s.counts = {e.count("general.nx"), e.count("general.ny"), e.count("general.nz"),
              e.count("general.nmu"), e.count("general.nphi"), e.count("general.groups")};
  s.extents = {e.real("general.x_max"), e.real("general.y_max"), e.real("general.z_max"),
               e.real("general.e_max")};
  const int g = s.counts.ngroups;
  s.speed = e.array("general.speed", g);
  s.sigma_total = e.array("general.sigma_total", g);
  s.sigma_capture = e.array("general.sigma_capture", g);
  const Eigen::ArrayXd flat = e.array("general.kernel", static_cast<Eigen::Index>(g) * g);
  s.kernel = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), g, g);
  s.source = e.array("general.source", g);
  s.source_t_on = e.real("general.source_t_on");
  s.source_t_off = e.real("general.source_t_off");
  s.conservative = e.has("general.conservative") && e.boolean("general.conservative");
  const std::array<int, 3> axis_counts{s.counts.nx, s.counts.ny, s.counts.nz};
  for (int f = 0; f < 6; ++f) {
    const std::string key = std::string("general.boundary.") + kFaces[f];
    const bool active = f < 2 || axis_counts[f / 2] > 1;
    if (!active) {
      if (e.has(key)) throw UsageError(e.where(key) + ": face of a collapsed axis");
      s.faces[f] = {};
      continue;
    }
    s.faces[f].kind = boundary_kind(e.raw(key), e.where(key));
    if (s.faces[f].kind == BoundaryKind::inflow) {
      const std::string base = std::string("general.inflow.") + kFaces[f];
      s.faces[f].rate = e.real(base + ".rate");
      s.faces[f].t_on = e.real(base + ".t_on");
      s.faces[f].t_off = e.real(base + ".t_off");
    }
  }
  s.initial = e.real("general.initial");
  s.dt = e.real("general.dt");
  s.t_end = e.real("general.t_end");
  s.clamp = e.clamp("general.clamp");
}

void parse_output(ConfigEntries& e, OutputOptions& o) {
  if (e.has("output.dir")) o.dir = trim(e.raw("output.dir"));
  if (o.dir.empty()) throw UsageError("output.dir must not be empty");
  if (e.has("output.observables")) {
    std::istringstream is(e.raw("output.observables"));
    std::string name;
    while (std::getline(is, name, ',')) {
      name = trim(name);
      if (name.empty()) throw UsageError(e.where("output.observables") + ": empty name");
      o.observables.push_back(name);
    }
  }
  if (e.has("output.cadence")) o.cadence = static_cast<std::size_t>(e.count("output.cadence"));
  if (e.has("output.window_start")) o.window_start = e.real("output.window_start");
  if (e.has("output.window_end")) o.window_end = e.real("output.window_end");
  if (e.has("output.snapshot_times")) o.snapshot_times = e.list("output.snapshot_times");
  if (e.has("output.per_path")) o.per_path = e.boolean("output.per_path");
}

Method method_from(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  if (t == "sde") return Method::sde;
  if (t == "mc") return Method::mc;
  if (t == "deterministic") return Method::deterministic;
  throw UsageError(where + ": expected sde, mc or deterministic");
}

bool same(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
  return a.size() == b.size() && (a == b).all();
}
bool same(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

void validate_window(const RunConfig& c) {
  const auto [a, b] = c.window();
  if (!(a <= b) || a < 0 || b > c.t_end() * (1 + 1e-12)) {
    throw UsageError("output window must satisfy 0 <= start <= end <= t_end");
  }
}

}  // namespace

const char* to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::slab: return "slab";
    case ProblemKind::energy: return "energy";
    case ProblemKind::general: return "general";
  }
  return "?";
}

const char* to_string(Method m) {
  switch (m) {
    case Method::sde: return "sde";
    case Method::mc: return "mc";
    case Method::deterministic: return "deterministic";
  }
  return "?";
}

const char* to_string(ClampPolicy c) {
  return c == ClampPolicy::rates_only ? "rates_only" : "zero_negative";
}


ConfigEntries::ConfigEntries(std::map<std::string, std::pair<std::string, int>> kv, std::string origin)
    : kv_(std::move(kv)), origin_(std::move(origin)) {}

bool ConfigEntries::has(const std::string& key) const { return kv_.count(key) > 0; }

bool ConfigEntries::has_prefix(const std::string& prefix) const {
  const auto it = kv_.lower_bound(prefix);
  return it != kv_.end() && it->first.rfind(prefix, 0) == 0;
}

const std::string& ConfigEntries::raw(const std::string& key) {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw UsageError(origin_ + ": missing required key '" + key + "'");
  used_.insert(key);
  return it->second.first;
}

std::string ConfigEntries::where(const std::string& key) const {
  const auto it = kv_.find(key);
  return origin_ + ":" + (it == kv_.end() ? std::string("?") : std::to_string(it->second.second)) +
         " (" + key + ")";
}

std::string ConfigEntries::text(const std::string& key) { return trim(raw(key)); }

double ConfigEntries::real(const std::string& key) { return to_double(raw(key), where(key)); }

double ConfigEntries::real_or(const std::string& key, double fallback) {
  return has(key) ? real(key) : fallback;
}

long long ConfigEntries::integer(const std::string& key) {
  const std::string t = trim(raw(key));
  long long v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) {
    throw UsageError(where(key) + ": '" + t + "' is not an integer");
  }
  return v;
}

int ConfigEntries::count(const std::string& key) {
  const long long v = integer(key);
  if (v < 1 || v > std::numeric_limits<int>::max()) throw UsageError(where(key) + ": must be >= 1");
  return static_cast<int>(v);
}

std::uint64_t ConfigEntries::unsigned64(const std::string& key) {
  const std::string t = trim(raw(key));
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) {
    throw UsageError(where(key) + ": '" + t + "' is not an unsigned integer");
  }
  return v;
}

bool ConfigEntries::boolean(const std::string& key) {
  const std::string t = trim(raw(key));
  if (t == "true") return true;
  if (t == "false") return false;
  throw UsageError(where(key) + ": expected true or false");
}

Eigen::ArrayXd ConfigEntries::array(const std::string& key, Eigen::Index n) {
  std::vector<double> v = list(key);
  if (v.size() == 1) return Eigen::ArrayXd::Constant(n, v[0]);
  if (static_cast<Eigen::Index>(v.size()) != n) {
    throw UsageError(where(key) + ": expected " + std::to_string(n) + " values, got " +
                     std::to_string(v.size()));
  }
  return Eigen::Map<Eigen::ArrayXd>(v.data(), n);
}

std::vector<double> ConfigEntries::list(const std::string& key) {
  try {
    return parse_list(raw(key));
  } catch (const UsageError& e) {
    throw UsageError(where(key) + ": " + e.what());
  }
}

ClampPolicy ConfigEntries::clamp(const std::string& key) {
  if (!has(key)) return ClampPolicy::rates_only;
  const std::string t = trim(raw(key));
  if (t == "rates_only") return ClampPolicy::rates_only;
  if (t == "zero_negative") return ClampPolicy::zero_negative;
  throw UsageError(where(key) + ": expected rates_only or zero_negative");
}

void ConfigEntries::reject_unused() const {
  for (const auto& [key, value] : kv_) {
    if (!used_.count(key)) throw UsageError(where(key) + ": unknown key");
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (item.empty()) throw UsageError("empty list item");
    const auto star = item.find('*');
    if (star == std::string::npos) {
      out.push_back(to_double(item, "list item"));
      continue;
    }
    const std::string n_text = trim(item.substr(0, star));
    long long n = 0;
    const auto [p, ec] = std::from_chars(n_text.data(), n_text.data() + n_text.size(), n);
    if (ec != std::errc() || p != n_text.data() + n_text.size() || n < 1) {
      throw UsageError("bad repeat count in '" + item + "'");
    }
    out.insert(out.end(), static_cast<std::size_t>(n), to_double(item.substr(star + 1), "list item"));
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

double RunConfig::t_end() const {
  switch (problem) {
    case ProblemKind::slab: return slab.t_end;
    case ProblemKind::energy: return energy.t_end;
    case ProblemKind::general: return general.t_end;
  }
  return 0.0;
}

std::pair<double, double> RunConfig::window() const {
  const double end = output.window_end.value_or(t_end());
  const double fallback = problem == ProblemKind::energy ? end : end - 1.0;
  return {output.window_start.value_or(fallback), end};
}

ConfigEntries read_entries(std::istream& is, const std::string& origin) {
  std::map<std::string, std::pair<std::string, int>> kv;
  std::string line;
  int row = 0;
  while (std::getline(is, line)) {
    ++row;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(origin + ":" + std::to_string(row) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw UsageError(origin + ":" + std::to_string(row) + ": empty key or value");
    }
    if (!kv.emplace(key, std::make_pair(value, row)).second) {
      throw UsageError(origin + ":" + std::to_string(row) + ": duplicate key '" + key + "'");
    }
  }
  return ConfigEntries(std::move(kv), origin);
}

RunConfig parse_config(std::istream& is, const std::string& origin) {
  ConfigEntries e = read_entries(is, origin);
  int sections = 0;
  RunConfig c;
  for (auto [prefix, kind] : {std::pair{"slab.", ProblemKind::slab}, {"energy.", ProblemKind::energy},
                              {"general.", ProblemKind::general}}) {
    if (e.has_prefix(prefix)) {
      ++sections;
      c.problem = kind;
    }
  }
  if (sections != 1) throw UsageError(origin + ": exactly one of slab., energy., general. is required");

  if (e.has("run.method")) c.method = method_from(e.raw("run.method"), e.where("run.method"));
  if (e.has("run.paths")) c.paths = e.count("run.paths");
  if (e.has("run.seed")) c.seed = e.unsigned64("run.seed");
  switch (c.problem) {
    case ProblemKind::slab: parse_slab(e, c.slab); break;
    case ProblemKind::energy: parse_energy(e, c.energy); break;
    case ProblemKind::general: parse_general(e, c.general); break;
  }
  parse_output(e, c.output);
  e.reject_unused();
  validate_window(c);
  // Constructing the problem runs every physics validity check.
  switch (c.problem) {
    case ProblemKind::slab: make_slab(c); break;
    case ProblemKind::energy: make_energy(c); break;
    case ProblemKind::general: make_general(c); break;
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

std::string serialize(const RunConfig& c) {
  std::ostringstream os;
  auto kv = [&](const std::string& k, const std::string& v) { os << k << " = " << v << '\n'; };
  kv("run.method", to_string(c.method));
  kv("run.paths", std::to_string(c.paths));
  kv("run.seed", std::to_string(c.seed));
  switch (c.problem) {
    case ProblemKind::slab: {
      const auto& p = c.slab;
      kv("slab.cells", std::to_string(p.cells));
      kv("slab.directions", std::to_string(p.directions));
      kv("slab.x_max", fmt(p.x_max));
      kv("slab.speed", fmt(p.speed));
      kv("slab.sigma_s", fmt_list(p.sigma_s));
      kv("slab.sigma_c", fmt_list(p.sigma_c));
      kv("slab.influx", fmt(p.influx));
      kv("slab.t_on", fmt(p.t_on));
      kv("slab.t_off", fmt(p.t_off));
      kv("slab.dt", fmt(p.dt));
      kv("slab.t_end", fmt(p.t_end));
      kv("slab.mc_dt", fmt(p.mc_dt));
      kv("slab.clamp", to_string(p.clamp));
      break;
    }
    case ProblemKind::energy: {
      const auto& p = c.energy;
      kv("energy.groups", std::to_string(p.groups));
      kv("energy.e_max", fmt(p.e_max));
      kv("energy.v_sigma", fmt_list(p.v_sigma));
      kv("energy.v_sigma_c", fmt_list(p.v_sigma_c));
      kv("energy.kernel", fmt_matrix(p.kernel));
      kv("energy.source", fmt_list(p.source));
      kv("energy.initial", fmt_list(p.initial));
      kv("energy.dt", fmt(p.dt));
      kv("energy.t_end", fmt(p.t_end));
      kv("energy.mc_dt", fmt(p.mc_dt));
      kv("energy.band_split", fmt(p.band_split));
      kv("energy.clamp", to_string(p.clamp));
      break;
    }
    case ProblemKind::general: {
      const auto& s = c.general;
      kv("general.nx", std::to_string(s.counts.nx));
      kv("general.ny", std::to_string(s.counts.ny));
      kv("general.nz", std::to_string(s.counts.nz));
      kv("general.nmu", std::to_string(s.counts.nmu));
      kv("general.nphi", std::to_string(s.counts.nphi));
      kv("general.groups", std::to_string(s.counts.ngroups));
      kv("general.x_max", fmt(s.extents.x_max));
      kv("general.y_max", fmt(s.extents.y_max));
      kv("general.z_max", fmt(s.extents.z_max));
      kv("general.e_max", fmt(s.extents.e_max));
      kv("general.speed", fmt_list(s.speed));
      kv("general.sigma_total", fmt_list(s.sigma_total));
      kv("general.sigma_capture", fmt_list(s.sigma_capture));
      kv("general.kernel", fmt_matrix(s.kernel));
      kv("general.source", fmt_list(s.source));
      kv("general.source_t_on", fmt(s.source_t_on));
      kv("general.source_t_off", fmt(s.source_t_off));
      kv("general.conservative", s.conservative ? "true" : "false");
      const std::array<int, 3> axis_counts{s.counts.nx, s.counts.ny, s.counts.nz};
      for (int f = 0; f < 6; ++f) {
        if (f >= 2 && axis_counts[f / 2] == 1) continue;
        kv(std::string("general.boundary.") + kFaces[f], to_string(s.faces[f].kind));
        if (s.faces[f].kind == BoundaryKind::inflow) {
          const std::string base = std::string("general.inflow.") + kFaces[f];
          kv(base + ".rate", fmt(s.faces[f].rate));
          kv(base + ".t_on", fmt(s.faces[f].t_on));
          kv(base + ".t_off", fmt(s.faces[f].t_off));
        }
      }
      kv("general.initial", fmt(s.initial));
      kv("general.dt", fmt(s.dt));
      kv("general.t_end", fmt(s.t_end));
      kv("general.clamp", to_string(s.clamp));
      break;
    }
  }
  kv("output.dir", c.output.dir);
  if (!c.output.observables.empty()) {
    std::string names;
    for (const auto& n : c.output.observables) names += (names.empty() ? "" : ", ") + n;
    kv("output.observables", names);
  }
  kv("output.cadence", std::to_string(c.output.cadence));
  if (c.output.window_start) kv("output.window_start", fmt(*c.output.window_start));
  if (c.output.window_end) kv("output.window_end", fmt(*c.output.window_end));
  if (!c.output.snapshot_times.empty()) kv("output.snapshot_times", fmt_list(c.output.snapshot_times));
  kv("output.per_path", c.output.per_path ? "true" : "false");
  return os.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::istringstream lines(serialize(cfg));
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind("run.", 0) == 0 || line.rfind("output.", 0) == 0) continue;
    for (unsigned char ch : line + '\n') {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  if (a.problem != b.problem || a.method != b.method || a.paths != b.paths || a.seed != b.seed) return false;
  const auto& oa = a.output;
  const auto& ob = b.output;
  if (oa.dir != ob.dir || oa.observables != ob.observables || oa.cadence != ob.cadence ||
      oa.window_start != ob.window_start || oa.window_end != ob.window_end ||
      oa.snapshot_times != ob.snapshot_times || oa.per_path != ob.per_path) {
    return false;
  }
  switch (a.problem) {
    case ProblemKind::slab: {
      const auto& p = a.slab;
      const auto& q = b.slab;
      return p.cells == q.cells && p.directions == q.directions && p.x_max == q.x_max &&
             p.speed == q.speed && same(p.sigma_s, q.sigma_s) && same(p.sigma_c, q.sigma_c) &&
             p.influx == q.influx && p.t_on == q.t_on && p.t_off == q.t_off && p.dt == q.dt &&
             p.t_end == q.t_end && p.mc_dt == q.mc_dt && p.clamp == q.clamp;
    }
    case ProblemKind::energy: {
      const auto& p = a.energy;
      const auto& q = b.energy;
      return p.groups == q.groups && p.e_max == q.e_max && same(p.v_sigma, q.v_sigma) &&
             same(p.v_sigma_c, q.v_sigma_c) && same(p.kernel, q.kernel) && same(p.source, q.source) &&
             same(p.initial, q.initial) && p.dt == q.dt && p.t_end == q.t_end && p.mc_dt == q.mc_dt &&
             p.band_split == q.band_split && p.clamp == q.clamp;
    }
    case ProblemKind::general: {
      const auto& s = a.general;
      const auto& r = b.general;
      for (int f = 0; f < 6; ++f) {
        const auto& x = s.faces[f];
        const auto& y = r.faces[f];
        if (x.kind != y.kind || x.rate != y.rate || x.t_on != y.t_on || x.t_off != y.t_off) return false;
      }
      return s.counts == r.counts && s.extents == r.extents && same(s.speed, r.speed) &&
             same(s.sigma_total, r.sigma_total) && same(s.sigma_capture, r.sigma_capture) &&
             same(s.kernel, r.kernel) && same(s.source, r.source) && s.source_t_on == r.source_t_on &&
             s.source_t_off == r.source_t_off && s.conservative == r.conservative &&
             s.initial == r.initial && s.dt == r.dt && s.t_end == r.t_end && s.clamp == r.clamp;
    }
  }
  return false;
}

SlabProblem make_slab(const RunConfig& cfg) {
  if (cfg.problem != ProblemKind::slab) throw UsageError("config does not describe a slab problem");
  SlabParams p = cfg.slab;
  p.snapshot_times = cfg.output.snapshot_times;
  return SlabProblem(std::move(p));
}

EnergyProblem make_energy(const RunConfig& cfg) {
  if (cfg.problem != ProblemKind::energy) throw UsageError("config does not describe an energy problem");
  EnergyParams p = cfg.energy;
  p.snapshot_times = cfg.output.snapshot_times;
  return EnergyProblem(std::move(p));
}

GeneralProblem make_general(const RunConfig& cfg) {
  if (cfg.problem != ProblemKind::general) throw UsageError("config does not describe a general problem");
  const auto& s = cfg.general;
  PhaseSpaceGrid grid(s.counts, s.extents);
  const int cells = grid.num_cells();
  MaterialSpec spec;
  spec.sigma_total = s.sigma_total.transpose().replicate(cells, 1);
  spec.sigma_capture = s.sigma_capture.transpose().replicate(cells, 1);
  spec.speed = s.speed;
  spec.kernel = TransferKernel::isotropic(s.kernel, cells);
  if ((s.source != 0).any()) {
    spec.source = (s.source / (4.0 * std::numbers::pi)).transpose().replicate(cells, 1);
    spec.source_t_on = s.source_t_on;
    spec.source_t_off = s.source_t_off;
  }
  spec.conservative = s.conservative;
  MaterialModel mat(grid, std::move(spec));
  Boundaries bc;
  for (int f = 0; f < 6; ++f) {
    auto& fc = bc.faces[f];
    fc.kind = s.faces[f].kind;
    fc.inflow_rate = s.faces[f].rate;
    fc.t_on = s.faces[f].t_on;
    fc.t_off = s.faces[f].t_off;
  }
  if (!(s.initial >= 0)) throw UsageError("general.initial must be >= 0");
  if (!(s.dt > 0) || !(s.t_end > 0)) throw UsageError("general.dt and general.t_end must be > 0");
  GeneralProblem prob{TransportModel(grid, std::move(mat), std::move(bc)),
                      {Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.num_packets()), s.initial), 0.0},
                      s.dt,
                      s.t_end,
                      s.clamp,
                      cfg.output.snapshot_times};
  if (courant_number(prob.model, prob.dt) > 1.0 + 1e-12) {
    throw UsageError("general: CFL condition v |mu| dt / d <= 1 violated");
  }
  return prob;
}

}  // namespace ntsde
