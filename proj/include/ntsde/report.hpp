// Summary comparison and plot-ready figure export.
#ifndef NTSDE_REPORT_HPP
#define NTSDE_REPORT_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "ntsde/config.hpp"
#include "ntsde/ensemble.hpp"
#include "ntsde/path_result.hpp"

namespace ntsde {

struct SummaryRow {
  std::string observable;
  double mean = 0.0;
  double std = 0.0;
  double se = 0.0;
  std::size_t n = 0;
  std::string method;
  std::string config_hash;
};

/// Reads a summary.csv written by write_summary.
std::vector<SummaryRow> read_summary(std::istream& is, const std::string& origin = "<summary>");
std::vector<SummaryRow> read_summary_file(const std::string& path);
std::vector<SummaryRow> summary_rows(const EnsembleResult& r);

/// (mean_a - mean_b) / sqrt(se_a^2 + se_b^2); 0 when both means and both
/// standard errors agree, +-inf for differing means with zero error.
double z_score(double mean_a, double se_a, double mean_b, double se_b);

struct ComparisonRow {
  std::string observable;
  SummaryRow a;
  SummaryRow b;
  double z = 0.0;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  double threshold = 3.0;
  bool pass() const;
};

/// Rows follow the order of `a`; both summaries must hold the same
/// observables.
Comparison compare(const std::vector<SummaryRow>& a, const std::vector<SummaryRow>& b,
                   double threshold = 3.0);

/// `observable,method_a,mean_a,std_a,n_a,method_b,mean_b,std_b,n_b,z,verdict`.
void write_comparison(std::ostream& os, const Comparison& c);

struct FigureInput {
  std::string method;
  PathResult path;
};

/// Columns drawn for each problem: slab left/right leakage, energy band
/// totals, general total population.
std::vector<std::string> figure_columns(ProblemKind kind);

/// Writes <dir>/<stem>_<method>.csv per input and returns the file names.
std::vector<std::string> emit_figures(const std::vector<FigureInput>& inputs, ProblemKind kind,
                                      const std::string& dir, const std::string& stem);

}  // namespace ntsde

#endif  // NTSDE_REPORT_HPP
