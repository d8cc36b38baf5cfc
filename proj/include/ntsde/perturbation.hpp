// Mean and variance shifts of a capture-only population when the capture
// rate v sigma_c(E, t) is perturbed. Each energy bin is a pure-death
// process, so
//   E n_k(t)     = n_k(0) e^{-L_k(t)},
//   Var n_k(t)   = n_k(0) e^{-2 L_k(t)} int_0^t l_k(s) e^{L_k(s)} ds,
// with l_k the rate and L_k(t) = int_0^t l_k. The inner integral equals
// e^{L_k(t)} - 1 for any rate history; the code evaluates it by quadrature
// and the tests use the closed form as the oracle.
#ifndef NTSDE_PERTURBATION_HPP
#define NTSDE_PERTURBATION_HPP

#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace ntsde {

using RateFunction = std::function<double(double energy, double t)>;
using TimeRate = std::function<double(double t)>;

/// Rate on a full (E, t) grid, bilinear inside and held constant beyond
/// the table edges.
class RateTable {
 public:
  RateTable(std::vector<double> energies, std::vector<double> times, Eigen::MatrixXd values);
  /// CSV with header `E,t,rate`; rows may come in any order but must cover
  /// every (E, t) pair of the grid exactly once.
  static RateTable read_csv(std::istream& is);

  double operator()(double energy, double t) const;
  const std::vector<double>& energies() const { return e_; }
  const std::vector<double>& times() const { return t_; }

 private:
  std::vector<double> e_, t_;
  Eigen::MatrixXd v_;  // (energy, time)
};

struct CaptureHistory {
  RateFunction rate;         ///< v sigma_c(E, t)
  RateFunction perturbed;    ///< v sigma_c~(E, t)
  std::function<double(double)> initial;  ///< N(E, 0) per unit energy
  double e_max = 0.0;
};

struct BinMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance() const { return second_moment - mean * mean; }
};

/// Integrates dm/dt = -l m, ds/dt = -2 l s + l m from (n0, n0^2) with
/// adaptive RK4 (step doubling) to relative tolerance `tol`.
BinMoments bin_moments(const TimeRate& rate, double n0, double t, double tol = 1e-11);
/// Bin centred on `energy` of width `width`, n0 = N(energy, 0) * width.
BinMoments bin_moments(const CaptureHistory& hist, double energy, double width, double t,
                       double tol = 1e-11);

struct Quadrature {
  int energy_intervals = 200;  ///< composite Simpson in E, even
  int time_intervals = 400;    ///< composite Simpson in t, even
};

double delta_mean(const CaptureHistory& hist, double t, const Quadrature& q = {});
double delta_variance(const CaptureHistory& hist, double t, const Quadrature& q = {});

/// Mean and variance of the total count under one rate history.
struct TotalMoments {
  double mean = 0.0;
  double variance = 0.0;
};
TotalMoments total_moments(const RateFunction& rate, const std::function<double(double)>& initial,
                           double e_max, double t, const Quadrature& q = {});

}  // namespace ntsde

#endif  // NTSDE_PERTURBATION_HPP
