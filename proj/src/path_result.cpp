#include "ntsde/path_result.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "ntsde/errors.hpp"

namespace ntsde {

std::vector<double>& PathResult::add_series(std::string name) {
  names.push_back(std::move(name));
  series.emplace_back();
  return series.back();
}

bool PathResult::has(std::string_view name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

const std::vector<double>& PathResult::observable(std::string_view name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw UsageError("path result has no observable '" + std::string(name) + "'");
  return series[static_cast<std::size_t>(it - names.begin())];
}

double PathResult::window_mean(std::string_view name, double t0, double t1) const {
  const auto& s = observable(name);
  const double eps = 1e-9 * std::max(1.0, std::abs(t1));
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < time.size(); ++k) {
    if (time[k] > t0 + eps && time[k] <= t1 + eps) {
      sum += s[k];
      ++count;
    }
  }
  if (count == 0) throw UsageError("window_mean: no samples in the requested window");
  return sum / static_cast<double>(count);
}

double PathResult::value_at(std::string_view name, double t) const {
  const auto& s = observable(name);
  if (time.empty()) throw UsageError("value_at: empty path result");
  std::size_t best = 0;
  for (std::size_t k = 1; k < time.size(); ++k) {
    if (std::abs(time[k] - t) < std::abs(time[best] - t)) best = k;
  }
  return s[best];
}

bool PathResult::all_finite() const {
  for (const auto& s : series) {
    for (double v : s) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void PathResult::write_csv(std::ostream& os, const std::vector<std::string>& columns,
                           std::size_t cadence) const {
  std::vector<const std::vector<double>*> cols;
  const auto& chosen = columns.empty() ? names : columns;
  os << 't';
  for (const auto& name : chosen) {
    cols.push_back(&observable(name));
    os << ',' << name;
  }
  os << '\n';
  if (cadence == 0) cadence = 1;
  char buf[32];
  for (std::size_t k = 0; k < time.size(); ++k) {
    if (k % cadence != 0 && k + 1 != time.size()) continue;
    std::snprintf(buf, sizeof buf, "%.10g", time[k]);
    os << buf;
    for (const auto* c : cols) {
      std::snprintf(buf, sizeof buf, ",%.17g", (*c)[k]);
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace ntsde
