#include "ntsde/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "ntsde/errors.hpp"

namespace ntsde {

namespace {

double field_number(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError(where + ": '" + text + "' is not a number");
}

}  // namespace

std::vector<SummaryRow> read_summary(std::istream& is, const std::string& origin) {
  std::string line;
  if (!std::getline(is, line)) throw UsageError(origin + ": empty summary");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "observable,mean,std,se,n,method,config_hash") {
    throw UsageError(origin + ": not a summary file (unexpected header)");
  }
  std::vector<SummaryRow> rows;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    const std::string where = origin + ":" + std::to_string(row);
    if (f.size() != 7) throw UsageError(where + ": expected 7 fields");
    SummaryRow r;
    r.observable = f[0];
    r.mean = field_number(f[1], where);
    r.std = field_number(f[2], where);
    r.se = field_number(f[3], where);
    const double n = field_number(f[4], where);
    if (n < 1 || n != std::floor(n)) throw UsageError(where + ": n must be a positive integer");
    r.n = static_cast<std::size_t>(n);
    r.method = f[5];
    r.config_hash = f[6];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<SummaryRow> read_summary_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read summary '" + path + "'");
  return read_summary(in, path);
}

std::vector<SummaryRow> summary_rows(const EnsembleResult& r) {
  std::vector<SummaryRow> rows;
  for (const auto& s : r.stats) rows.push_back({s.name, s.mean, s.std, s.se, s.n, r.method, r.config_hash});
  return rows;
}

double z_score(double mean_a, double se_a, double mean_b, double se_b) {
  const double diff = mean_a - mean_b;
  const double se = std::sqrt(se_a * se_a + se_b * se_b);
  if (se == 0.0) {
    if (diff == 0.0) return 0.0;
    return diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  }
  return diff / se;
}

bool Comparison::pass() const {
  return std::all_of(rows.begin(), rows.end(), [&](const auto& r) { return std::abs(r.z) <= threshold; });
}

Comparison compare(const std::vector<SummaryRow>& a, const std::vector<SummaryRow>& b, double threshold) {
  if (!(threshold > 0)) throw UsageError("compare: threshold must be > 0");
  if (a.size() != b.size()) throw UsageError("compare: summaries hold different observables");
  Comparison c;
  c.threshold = threshold;
  for (const auto& ra : a) {
    const auto it = std::find_if(b.begin(), b.end(), [&](const auto& rb) { return rb.observable == ra.observable; });
    if (it == b.end()) throw UsageError("compare: observable '" + ra.observable + "' missing from second summary");
    c.rows.push_back({ra.observable, ra, *it, z_score(ra.mean, ra.se, it->mean, it->se)});
  }
  return c;
}

void write_comparison(std::ostream& os, const Comparison& c) {
  os << "observable,method_a,mean_a,std_a,n_a,method_b,mean_b,std_b,n_b,z,verdict\n";
  char buf[160];
  for (const auto& r : c.rows) {
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%zu", r.a.mean, r.a.std, r.a.n);
    os << r.observable << ',' << r.a.method << ',' << buf << ',' << r.b.method << ',';
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%zu,%.4f", r.b.mean, r.b.std, r.b.n, r.z);
    os << buf << ',' << (std::abs(r.z) <= c.threshold ? "agree" : "differ") << '\n';
  }
}

std::vector<std::string> figure_columns(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::slab: return {"left_leakage", "right_leakage"};
    case ProblemKind::energy: return {"n_low", "n_high"};
    case ProblemKind::general: return {"total"};
  }
  return {};
}

std::vector<std::string> emit_figures(const std::vector<FigureInput>& inputs, ProblemKind kind,
                                      const std::string& dir, const std::string& stem) {
  const auto columns = figure_columns(kind);
  for (const auto& in : inputs) {
    for (const auto& c : columns) {
      if (!in.path.has(c)) throw UsageError("figures: " + in.method + " result lacks '" + c + "'");
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
  std::vector<std::string> files;
  for (const auto& in : inputs) {
    const std::string file = (std::filesystem::path(dir) / (stem + "_" + in.method + ".csv")).string();
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write '" + file + "'");
    in.path.write_csv(out, columns);
    files.push_back(file);
  }
  return files;
}

}  // namespace ntsde
