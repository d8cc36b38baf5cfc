#include "ntsde/stats.hpp"

#include <cmath>
#include <utility>

#include "ntsde/errors.hpp"

namespace ntsde {

ObservableStats summarize(std::string name, const std::vector<double>& values) {
  if (values.empty()) throw UsageError("summarize: no values for '" + name + "'");
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double x : values) {
    ++k;
    const double d = x - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (x - mean);
  }
  ObservableStats s;
  s.name = std::move(name);
  s.mean = mean;
  s.n = k;
  s.single_path = k == 1;
  if (k > 1) {
    s.std = std::sqrt(std::max(m2, 0.0) / static_cast<double>(k - 1));
    s.se = s.std / std::sqrt(static_cast<double>(k));
  }
  return s;
}

}  // namespace ntsde
