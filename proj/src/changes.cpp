#include "ntsde/changes.hpp"

#include <algorithm>
#include <cmath>

#include "ntsde/errors.hpp"

namespace ntsde {

namespace {

constexpr std::array<Axis, 3> kAxes{Axis::x, Axis::y, Axis::z};

struct StreamTerms {
  double in = 0.0;
  std::size_t in_partner = kNoPacket;
  double out = 0.0;           // magnitude, per unit time
  int leak_face = -1;         // face receiving `out` as leakage, or -1
};

// Upwind in/out flux of one packet along one axis.
StreamTerms stream_along(const PopulationState& state, const TransportModel& model,
                         PacketIndex p, Axis axis) {
  const auto& grid = model.grid;
  StreamTerms s;
  const double co = grid.cosines(p.dir).along(axis);
  if (co == 0.0) return s;
  const double v = model.material.speed(p.group);
  const double w = std::abs(co) * v / grid.width(axis);
  const auto coords = grid.cell_coords(p.cell);
  const int a = static_cast<int>(axis);
  const int up = coords[a] + (co > 0 ? -1 : 1);
  const int down = coords[a] + (co > 0 ? 1 : -1);
  const std::size_t self = grid.packet(p);
  s.out = w * state.n(static_cast<Eigen::Index>(self));

  if (up >= 0 && up < grid.count(axis)) {
    auto nb = coords;
    nb[a] = up;
    s.in_partner = grid.packet(grid.cell(nb[0], nb[1], nb[2]), p.dir, p.group);
    s.in = w * state.n(static_cast<Eigen::Index>(s.in_partner));
  } else {
    const Face face = static_cast<Face>(2 * a + (co > 0 ? 0 : 1));
    const auto& fc = model.boundaries[face];
    switch (fc.kind) {
      case BoundaryKind::vacuum:
        break;
      case BoundaryKind::reflecting:
        s.in_partner = grid.packet(p.cell, grid.mirror(p.dir, axis), p.group);
        s.in = w * state.n(static_cast<Eigen::Index>(s.in_partner));
        break;
      case BoundaryKind::inflow:
        s.in = model.inflow_rate(face, p.dir, p.group, state.t);
        break;
    }
  }
  if (down < 0 || down >= grid.count(axis)) {
    const Face face = static_cast<Face>(2 * a + (co > 0 ? 1 : 0));
    if (model.boundaries[face].kind != BoundaryKind::reflecting) s.leak_face = static_cast<int>(face);
  }
  return s;
}

void check_index(const TransportModel& model, PacketIndex p) {
  const auto& g = model.grid;
  if (p.cell < 0 || p.cell >= g.num_cells() || p.dir < 0 || p.dir >= g.num_directions() ||
      p.group < 0 || p.group >= g.ngroups()) {
    throw UsageError("change_table: packet index out of range");
  }
}

}  // namespace

ChangeTable change_table(const PopulationState& state, const TransportModel& model,
                         PacketIndex p) {
  check_index(model, p);
  if (!state.finite()) throw UsageError("change_table: state is not finite");
  const auto& grid = model.grid;
  const auto& mat = model.material;
  ChangeTable table;
  const std::size_t self = grid.packet(p);
  auto clamped_count = [&](std::size_t packet) {
    const double n = state.n(static_cast<Eigen::Index>(packet));
    if (n < 0) table.clamped = true;
    return std::max(n, 0.0);
  };

  for (Axis axis : kAxes) {
    if (!grid.axis_active(axis)) continue;
    const auto s = stream_along(state, model, p, axis);
    table.entries.push_back({s.in, 1.0, ChangeKind::stream, s.in_partner});
    table.entries.push_back({-s.out, 1.0, ChangeKind::stream, kNoPacket});
  }

  const double v = mat.speed(p.group);
  const double n = clamped_count(self);
  if (mat.sigma_capture(p.cell, p.group) > 0) {
    table.entries.push_back({-1.0, v * mat.sigma_capture(p.cell, p.group) * n, ChangeKind::capture});
  }
  if (mat.has_source()) {
    const double q = mat.source(p.cell, p.group, state.t);
    if (mat.spec().source(p.cell, p.group) > 0) {
      table.entries.push_back(
          {1.0, q * grid.cell_volume() * grid.bin_measure(), ChangeKind::source});
    }
  }
  if (mat.has_kernel()) {
    const double measure = grid.bin_measure();
    const double inv_c = 1.0 / mat.c_hat(p.cell, p.group);
    for (int g2 = 0; g2 < grid.ngroups(); ++g2) {
      for (int d2 = 0; d2 < grid.num_directions(); ++d2) {
        const double k_out = mat.transfer(p.cell, p.group, p.dir, g2, d2);
        if (k_out > 0) {
          // v sigma_hat f_hat n == v sigma' f n
          table.entries.push_back({-inv_c, v * k_out * n * measure, ChangeKind::transfer_out,
                                   grid.packet(p.cell, d2, g2)});
        }
      }
    }
    for (int g2 = 0; g2 < grid.ngroups(); ++g2) {
      for (int d2 = 0; d2 < grid.num_directions(); ++d2) {
        const double k_in = mat.transfer(p.cell, g2, d2, p.group, p.dir);
        if (k_in > 0) {
          const std::size_t from = grid.packet(p.cell, d2, g2);
          table.entries.push_back(
              {1.0, mat.speed(g2) * k_in * clamped_count(from) * measure, ChangeKind::transfer_in, from});
        }
      }
    }
  }
  return table;
}

ChannelSet stochastic_channels(const PopulationState& state, const TransportModel& model) {
  const auto& grid = model.grid;
  const auto& mat = model.material;
  ChannelSet set;
  const int dirs = grid.num_directions();
  const int groups = grid.ngroups();
  const double measure = grid.bin_measure();
  const double volume = grid.cell_volume();
  auto count = [&](std::size_t packet) {
    const double n = state.n(static_cast<Eigen::Index>(packet));
    if (n < 0) ++set.clamp_count;
    return std::max(n, 0.0);
  };

  for (int c = 0; c < grid.num_cells(); ++c) {
    for (int d = 0; d < dirs; ++d) {
      for (int g = 0; g < groups; ++g) {
        const std::size_t self = grid.packet(c, d, g);
        if (mat.sigma_capture(c, g) > 0) {
          set.channels.push_back({ChangeKind::capture, mat.speed(g) * mat.sigma_capture(c, g) * count(self),
                                  self, -1.0});
        }
        if (mat.has_source() && mat.spec().source(c, g) > 0) {
          set.channels.push_back(
              {ChangeKind::source, mat.source(c, g, state.t) * volume * measure, self, 1.0});
        }
      }
    }
    if (!mat.has_kernel()) continue;
    for (int d = 0; d < dirs; ++d) {
      for (int g = 0; g < groups; ++g) {
        const std::size_t from = grid.packet(c, d, g);
        const double rate_scale = mat.speed(g) * count(from) * measure;
        const double out_delta = -1.0 / mat.c_hat(c, g);
        for (int g2 = 0; g2 < groups; ++g2) {
          for (int d2 = 0; d2 < dirs; ++d2) {
            const double k = mat.transfer(c, g, d, g2, d2);
            if (!(k > 0)) continue;
            const std::size_t to = grid.packet(c, d2, g2);
            Channel ch{ChangeKind::transfer_out, rate_scale * k, from, out_delta};
            if (to == from) {
              ch.first_delta += 1.0;
            } else {
              ch.second = to;
              ch.second_delta = 1.0;
            }
            set.channels.push_back(ch);
          }
        }
      }
    }
  }
  return set;
}

Eigen::VectorXd streaming_drift(const PopulationState& state, const TransportModel& model,
                                FaceFlux* leakage) {
  const auto& grid = model.grid;
  Eigen::VectorXd drift = Eigen::VectorXd::Zero(state.n.size());
  if (leakage) leakage->fill(0.0);
  for (std::size_t i = 0; i < grid.num_packets(); ++i) {
    const PacketIndex p = grid.unpack(i);
    double sum = 0.0;
    for (Axis axis : kAxes) {
      if (!grid.axis_active(axis)) continue;
      const auto s = stream_along(state, model, p, axis);
      sum += s.in - s.out;
      if (leakage && s.leak_face >= 0) (*leakage)[static_cast<std::size_t>(s.leak_face)] += s.out;
    }
    drift(static_cast<Eigen::Index>(i)) = sum;
  }
  return drift;
}

Eigen::VectorXd drift_vector(const PopulationState& state, const TransportModel& model) {
  if (!state.finite()) throw UsageError("drift_vector: state is not finite");
  Eigen::VectorXd drift = streaming_drift(state, model);
  for (const auto& ch : stochastic_channels(state, model).channels) {
    drift(static_cast<Eigen::Index>(ch.first)) += ch.rate * ch.first_delta;
    if (ch.second != kNoPacket) drift(static_cast<Eigen::Index>(ch.second)) += ch.rate * ch.second_delta;
  }
  return drift;
}

Eigen::MatrixXd noise_amplitudes(const PopulationState& state, const TransportModel& model) {
  if (!state.finite()) throw UsageError("noise_amplitudes: state is not finite");
  const auto set = stochastic_channels(state, model);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(state.n.size(), static_cast<Eigen::Index>(set.channels.size()));
  for (std::size_t j = 0; j < set.channels.size(); ++j) {
    const auto& ch = set.channels[j];
    if (ch.rate < 0) throw InternalError("noise_amplitudes: negative rate after clamping");
    const double root = std::sqrt(ch.rate);
    const auto col = static_cast<Eigen::Index>(j);
    c(static_cast<Eigen::Index>(ch.first), col) = ch.first_delta * root;
    if (ch.second != kNoPacket) c(static_cast<Eigen::Index>(ch.second), col) = ch.second_delta * root;
  }
  return c;
}

Eigen::MatrixXd drift_covariance(const PopulationState& state, const TransportModel& model) {
  const auto n = state.n.size();
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  for (const auto& ch : stochastic_channels(state, model).channels) {
    const auto a = static_cast<Eigen::Index>(ch.first);
    v(a, a) += ch.rate * ch.first_delta * ch.first_delta;
    if (ch.second == kNoPacket) continue;
    const auto b = static_cast<Eigen::Index>(ch.second);
    v(b, b) += ch.rate * ch.second_delta * ch.second_delta;
    v(a, b) += ch.rate * ch.first_delta * ch.second_delta;
    v(b, a) += ch.rate * ch.first_delta * ch.second_delta;
  }
  return v;
}

}  // namespace ntsde
