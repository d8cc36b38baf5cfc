// Brownian-sheet sampling.
//
// A Brownian sheet W has independent Normal(0, |A|) increments over
// disjoint rectangles A. The solvers only ever need the per-bin Wiener
// increment sqrt(dt) * eta obtained by normalizing a sheet integral over a
// bin by sqrt(bin measure); full surfaces are built for diagnostics.
#ifndef NTSDE_SHEETS_HPP
#define NTSDE_SHEETS_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace ntsde {

/// Counter-based normal source. Draw k of a sampler is a pure function of
/// (seed, k), so equal seeds and equal request sequences give bit-identical
/// output.
class SheetSampler {
 public:
  explicit SheetSampler(std::uint64_t seed, int dimension = 2, std::vector<double> widths = {});

  std::uint64_t seed() const { return seed_; }
  int dimension() const { return dimension_; }
  const std::vector<double>& widths() const { return widths_; }
  std::uint64_t draws() const { return counter_; }

  /// Standard normal; advances the counter.
  double normal();

  /// Independent child sampler for one sample path.
  SheetSampler split(std::uint64_t path_index) const;

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  int dimension_;
  std::vector<double> widths_;
  std::uint64_t counter_ = 0;
};

/// W(A) for a rectangle of measure `area`: Normal(0, area).
double rectangle_increment(SheetSampler& sampler, double area);

/// sqrt(dt) * eta: the sheet integral over (bin x [t, t + dt]) divided by
/// sqrt(bin_measure).
double wiener_increment(SheetSampler& sampler, double bin_measure, double dt);

/// (W1(b) - W1(a)) (W2(d) - W2(c)) for independent Wiener processes W1, W2;
/// same variance as a sheet increment over [a,b]x[c,d] but kurtosis 9.
double wiener_product_increment(SheetSampler& sampler, double width_x, double width_t);

/// Cumulative sheet values W(x_i, t_j) on an (nx + 1) x (nt + 1) lattice.
class SheetSurface {
 public:
  SheetSurface(Eigen::MatrixXd cell_draws, double extent_x, double extent_t);

  const Eigen::MatrixXd& values() const { return values_; }
  /// Independent Normal(0, dx*dt) draws, (nx x nt); values() is their
  /// cumulative double sum.
  const Eigen::MatrixXd& cell_draws() const { return cells_; }
  int nx() const { return static_cast<int>(values_.rows()) - 1; }
  int nt() const { return static_cast<int>(values_.cols()) - 1; }
  double dx() const { return extent_x_ / nx(); }
  double dt() const { return extent_t_ / nt(); }
  double at(int i, int j) const { return values_(i, j); }

  /// W(b,d) - W(b,c) - W(a,d) + W(a,c) over lattice indices a<=b, c<=d.
  double increment(int a, int b, int c, int d) const;

  /// `x,t,w` header, one row per lattice point, x outer and t inner.
  void write_csv(std::ostream& os) const;

 private:
  Eigen::MatrixXd cells_;
  Eigen::MatrixXd values_;
  double extent_x_;
  double extent_t_;
};

SheetSurface sample_surface(SheetSampler& sampler, int nx, int nt, double extent_x,
                            double extent_t);

/// Sample moments E[X^2] and E[X^4] of a draw sequence.
struct EvenMoments {
  double second = 0.0;
  double fourth = 0.0;
};

template <typename Draw>
EvenMoments even_moments(Draw&& draw, std::size_t count) {
  long double s2 = 0, s4 = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const long double x = draw();
    const long double x2 = x * x;
    s2 += x2;
    s4 += x2 * x2;
  }
  return {static_cast<double>(s2 / count), static_cast<double>(s4 / count)};
}

}  // namespace ntsde

#endif  // NTSDE_SHEETS_HPP
