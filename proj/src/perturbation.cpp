#include "ntsde/perturbation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <utility>

#include "ntsde/errors.hpp"

namespace ntsde {

namespace {

// Locates x in sorted nodes: index of the left node and the weight of the
// right one, clamped to the table.
std::pair<std::size_t, double> bracket(const std::vector<double>& nodes, double x) {
  if (nodes.size() == 1 || x <= nodes.front()) return {0, 0.0};
  if (x >= nodes.back()) return {nodes.size() - 2, 1.0};
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  const auto i = static_cast<std::size_t>(it - nodes.begin()) - 1;
  return {i, (x - nodes[i]) / (nodes[i + 1] - nodes[i])};
}

double checked(double rate) {
  if (!(rate >= 0)) throw UsageError("capture rate must be >= 0 and finite");
  return rate;
}

void check_intervals(const Quadrature& q) {
  if (q.energy_intervals < 2 || q.energy_intervals % 2 != 0 || q.time_intervals < 2 ||
      q.time_intervals % 2 != 0) {
    throw UsageError("quadrature: interval counts must be even and >= 2");
  }
}

double simpson_weight(int i, int n) {
  if (i == 0 || i == n) return 1.0;
  return i % 2 == 1 ? 4.0 : 2.0;
}

// Per-energy factors of the total mean and variance for one rate history:
// e^{-L(t)} and e^{-2 L(t)} int_0^t l(s) e^{L(s)} ds.
std::pair<double, double> decay_factors(const RateFunction& rate, double energy, double t, int nt) {
  if (t == 0.0) return {1.0, 0.0};
  const double h = t / nt;
  double cum = 0.0;  // L at the current node
  double inner = 0.0;
  double prev = checked(rate(energy, 0.0));
  inner += prev;  // weight 1, e^{L(0)} = 1
  for (int i = 1; i <= nt; ++i) {
    const double s0 = (i - 1) * h;
    const double mid = checked(rate(energy, s0 + 0.5 * h));
    const double cur = checked(rate(energy, i * h));
    cum += h / 6.0 * (prev + 4.0 * mid + cur);
    inner += simpson_weight(i, nt) * cur * std::exp(cum);
    prev = cur;
  }
  inner *= h / 3.0;
  return {std::exp(-cum), std::exp(-2.0 * cum) * inner};
}

}  // namespace

RateTable::RateTable(std::vector<double> energies, std::vector<double> times, Eigen::MatrixXd values)
    : e_(std::move(energies)), t_(std::move(times)), v_(std::move(values)) {
  if (e_.empty() || t_.empty()) throw UsageError("rate table: needs at least one energy and time");
  if (v_.rows() != static_cast<Eigen::Index>(e_.size()) ||
      v_.cols() != static_cast<Eigen::Index>(t_.size())) {
    throw UsageError("rate table: value grid does not match the axes");
  }
  if (!std::is_sorted(e_.begin(), e_.end()) || !std::is_sorted(t_.begin(), t_.end()) ||
      std::adjacent_find(e_.begin(), e_.end()) != e_.end() ||
      std::adjacent_find(t_.begin(), t_.end()) != t_.end()) {
    throw UsageError("rate table: axes must be strictly increasing");
  }
  if (!(v_.array() >= 0).all()) throw UsageError("rate table: rates must be >= 0");
}

RateTable RateTable::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw UsageError("rate table: empty input");
  line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
  if (line != "E,t,rate") throw UsageError("rate table: header must be E,t,rate");
  std::map<std::pair<double, double>, double> cells;
  std::map<double, int> es, ts;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::array<double, 3> v{};
    std::istringstream ls(line);
    std::string field;
    for (int c = 0; c < 3; ++c) {
      if (!std::getline(ls, field, ',')) {
        throw UsageError("rate table: row " + std::to_string(row) + " needs three fields");
      }
      try {
        std::size_t used = 0;
        v[c] = std::stod(field, &used);
        if (field.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw UsageError("rate table: row " + std::to_string(row) + " has a non-numeric field");
      }
    }
    if (!cells.emplace(std::make_pair(v[0], v[1]), v[2]).second) {
      throw UsageError("rate table: duplicate (E, t) at row " + std::to_string(row));
    }
    es[v[0]] = 0;
    ts[v[1]] = 0;
  }
  std::vector<double> e, t;
  for (auto& [k, idx] : es) {
    idx = static_cast<int>(e.size());
    e.push_back(k);
  }
  for (auto& [k, idx] : ts) {
    idx = static_cast<int>(t.size());
    t.push_back(k);
  }
  if (cells.size() != e.size() * t.size()) throw UsageError("rate table: (E, t) grid is incomplete");
  Eigen::MatrixXd values(static_cast<Eigen::Index>(e.size()), static_cast<Eigen::Index>(t.size()));
  for (const auto& [key, rate] : cells) values(es[key.first], ts[key.second]) = rate;
  return RateTable(std::move(e), std::move(t), std::move(values));
}

double RateTable::operator()(double energy, double t) const {
  const auto [i, a] = bracket(e_, energy);
  const auto [j, b] = bracket(t_, t);
  const auto i1 = std::min(i + 1, e_.size() - 1);
  const auto j1 = std::min(j + 1, t_.size() - 1);
  return (1 - a) * ((1 - b) * v_(i, j) + b * v_(i, j1)) + a * ((1 - b) * v_(i1, j) + b * v_(i1, j1));
}

BinMoments bin_moments(const TimeRate& rate, double n0, double t, double tol) {
  if (!(t >= 0)) throw UsageError("bin_moments: t must be >= 0");
  if (!(n0 >= 0)) throw UsageError("bin_moments: n0 must be >= 0");
  using State = std::array<double, 2>;
  auto deriv = [&](double s, const State& y) -> State {
    const double l = checked(rate(s));
    return {-l * y[0], -2.0 * l * y[1] + l * y[0]};
  };
  auto rk4 = [&](double s, const State& y, double h) {
    const State k1 = deriv(s, y);
    const State k2 = deriv(s + h / 2, {y[0] + h / 2 * k1[0], y[1] + h / 2 * k1[1]});
    const State k3 = deriv(s + h / 2, {y[0] + h / 2 * k2[0], y[1] + h / 2 * k2[1]});
    const State k4 = deriv(s + h, {y[0] + h * k3[0], y[1] + h * k3[1]});
    return State{y[0] + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
                 y[1] + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
  };

  State y{n0, n0 * n0};
  double s = 0.0;
  double h = std::min(t, 0.01);
  while (s < t) {
    h = std::min(h, t - s);
    const State full = rk4(s, y, h);
    const State half = rk4(s + h / 2, rk4(s, y, h / 2), h / 2);
    double err = 0.0;
    for (int c = 0; c < 2; ++c) {
      const double scale = std::max(std::abs(half[c]), 1e-300);
      err = std::max(err, std::abs(half[c] - full[c]) / (15.0 * scale));
    }
    if (err <= tol || h < 1e-12 * std::max(1.0, t)) {
      s += h;
      for (int c = 0; c < 2; ++c) y[c] = half[c] + (half[c] - full[c]) / 15.0;
      h *= err > 0 ? std::clamp(0.9 * std::pow(tol / err, 0.2), 0.2, 4.0) : 4.0;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(tol / err, 0.2));
    }
  }
  return {y[0], y[1]};
}

BinMoments bin_moments(const CaptureHistory& hist, double energy, double width, double t, double tol) {
  if (!(width > 0)) throw UsageError("bin_moments: width must be > 0");
  return bin_moments([&](double s) { return hist.rate(energy, s); }, hist.initial(energy) * width, t,
                     tol);
}

TotalMoments total_moments(const RateFunction& rate, const std::function<double(double)>& initial,
                           double e_max, double t, const Quadrature& q) {
  check_intervals(q);
  if (!(t >= 0)) throw UsageError("perturbation: t must be >= 0");
  if (!(e_max > 0)) throw UsageError("perturbation: e_max must be > 0");
  const int ne = q.energy_intervals;
  const double he = e_max / ne;
  TotalMoments m;
  for (int i = 0; i <= ne; ++i) {
    const double e = i * he;
    const double n0 = initial(e);
    if (!(n0 >= 0)) throw UsageError("perturbation: initial density must be >= 0");
    const auto [mean, var] = decay_factors(rate, e, t, q.time_intervals);
    const double w = simpson_weight(i, ne) * he / 3.0;
    m.mean += w * n0 * mean;
    m.variance += w * n0 * var;
  }
  return m;
}

double delta_mean(const CaptureHistory& hist, double t, const Quadrature& q) {
  return total_moments(hist.perturbed, hist.initial, hist.e_max, t, q).mean -
         total_moments(hist.rate, hist.initial, hist.e_max, t, q).mean;
}

double delta_variance(const CaptureHistory& hist, double t, const Quadrature& q) {
  return total_moments(hist.perturbed, hist.initial, hist.e_max, t, q).variance -
         total_moments(hist.rate, hist.initial, hist.e_max, t, q).variance;
}

}  // namespace ntsde
