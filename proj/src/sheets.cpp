#include "ntsde/sheets.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <utility>

#include "ntsde/errors.hpp"
#include "ntsde/rng.hpp"

namespace ntsde {

namespace {
constexpr std::uint64_t kSheetTag = 0x5348454554ULL;  // "SHEET"
}

SheetSampler::SheetSampler(std::uint64_t seed, int dimension, std::vector<double> widths)
    : seed_(seed), key_(derive_seed(seed, kSheetTag)), dimension_(dimension), widths_(std::move(widths)) {
  if (dimension < 1) throw UsageError("sheet sampler: dimension must be >= 1");
  for (double w : widths_) {
    if (!(w > 0)) throw UsageError("sheet sampler: widths must be > 0");
  }
}

double SheetSampler::normal() { return normal_at(key_, counter_++); }

SheetSampler SheetSampler::split(std::uint64_t path_index) const {
  return SheetSampler(derive_seed(seed_, path_index), dimension_, widths_);
}

double rectangle_increment(SheetSampler& sampler, double area) {
  if (!(area > 0)) throw UsageError("rectangle_increment: area must be > 0");
  return std::sqrt(area) * sampler.normal();
}

double wiener_increment(SheetSampler& sampler, double bin_measure, double dt) {
  if (!(bin_measure > 0) || !(dt > 0)) {
    throw UsageError("wiener_increment: bin measure and dt must be > 0");
  }
  return rectangle_increment(sampler, bin_measure * dt) / std::sqrt(bin_measure);
}

double wiener_product_increment(SheetSampler& sampler, double width_x, double width_t) {
  if (!(width_x > 0) || !(width_t > 0)) {
    throw UsageError("wiener_product_increment: widths must be > 0");
  }
  const double w1 = std::sqrt(width_x) * sampler.normal();
  const double w2 = std::sqrt(width_t) * sampler.normal();
  return w1 * w2;
}

SheetSurface::SheetSurface(Eigen::MatrixXd cell_draws, double extent_x, double extent_t)
    : cells_(std::move(cell_draws)),
      values_(Eigen::MatrixXd::Zero(cells_.rows() + 1, cells_.cols() + 1)),
      extent_x_(extent_x),
      extent_t_(extent_t) {
  for (Eigen::Index i = 1; i < values_.rows(); ++i) {
    for (Eigen::Index j = 1; j < values_.cols(); ++j) {
      values_(i, j) = cells_(i - 1, j - 1) + values_(i - 1, j) + values_(i, j - 1) - values_(i - 1, j - 1);
    }
  }
}

double SheetSurface::increment(int a, int b, int c, int d) const {
  if (a < 0 || c < 0 || a > b || c > d || b > nx() || d > nt()) {
    throw UsageError("sheet increment: rectangle outside the lattice");
  }
  return values_(b, d) - values_(b, c) - values_(a, d) + values_(a, c);
}

void SheetSurface::write_csv(std::ostream& os) const {
  os << "x,t,w\n";
  char buf[96];
  for (int i = 0; i <= nx(); ++i) {
    for (int j = 0; j <= nt(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", i * dx(), j * dt(), values_(i, j));
      os << buf;
    }
  }
}

SheetSurface sample_surface(SheetSampler& sampler, int nx, int nt, double extent_x,
                            double extent_t) {
  if (nx < 1 || nt < 1) throw UsageError("sample_surface: lattice needs nx, nt >= 1");
  if (!(extent_x > 0) || !(extent_t > 0)) throw UsageError("sample_surface: extents must be > 0");
  const double cell_area = (extent_x / nx) * (extent_t / nt);
  Eigen::MatrixXd cells(nx, nt);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < nt; ++j) cells(i, j) = rectangle_increment(sampler, cell_area);
  }
  return SheetSurface(std::move(cells), extent_x, extent_t);
}

}  // namespace ntsde
