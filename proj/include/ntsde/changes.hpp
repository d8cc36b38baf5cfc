// Population state, the per-packet change table and the drift / noise
// construction built from it.
//
// For changes j with rates p_j (per unit time) altering packet i by
// lambda_{j,i}:
//   drift      mu_i    = sum_j p_j lambda_{j,i}
//   covariance V_{i,l} = sum_j p_j lambda_{j,i} lambda_{j,l}
//   noise      C_{i,j} = lambda_{j,i} sqrt(p_j),   C C^T = V.
// Streaming is deterministic and contributes to the drift only.
#ifndef NTSDE_CHANGES_HPP
#define NTSDE_CHANGES_HPP

#include <array>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "ntsde/material.hpp"

namespace ntsde {

/// Neutrons per packet (not per unit measure) at time t.
struct PopulationState {
  Eigen::VectorXd n;
  double t = 0.0;

  static PopulationState zeros(const PhaseSpaceGrid& grid, double t = 0.0) {
    return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.num_packets())), t};
  }
  bool finite() const { return n.allFinite(); }
};

enum class ChangeKind { stream, capture, transfer_out, transfer_in, source };

inline constexpr std::size_t kNoPacket = std::numeric_limits<std::size_t>::max();

/// One row of a packet's change table. For stochastic kinds `rate` is the
/// probability per unit time of a change of size `delta`. Streaming rows are
/// deterministic: `delta` holds the per-unit-time flux and `rate` is 1.
struct ChangeEntry {
  double delta = 0.0;
  double rate = 0.0;
  ChangeKind kind = ChangeKind::capture;
  /// Other packet of a transfer (source for transfer_in, target for
  /// transfer_out), upwind neighbour for streaming-in, else kNoPacket.
  std::size_t partner = kNoPacket;

  bool stochastic() const { return kind != ChangeKind::stream; }
};

struct ChangeTable {
  std::vector<ChangeEntry> entries;
  bool clamped = false;  ///< a negative packet count was read as zero
};

ChangeTable change_table(const PopulationState& state, const TransportModel& model,
                         PacketIndex packet);

/// A global stochastic change: one event at `rate` altering up to two
/// packets. A transfer from a to b is a single channel with deltas
/// (-1/c_hat, +1), so both ends share one Wiener increment.
struct Channel {
  ChangeKind kind = ChangeKind::capture;
  double rate = 0.0;
  std::size_t first = kNoPacket;
  double first_delta = 0.0;
  std::size_t second = kNoPacket;
  double second_delta = 0.0;
};

struct ChannelSet {
  std::vector<Channel> channels;
  std::size_t clamp_count = 0;
};

/// All stochastic channels in a fixed order that depends only on the
/// model's structural zeros, so channel j is the same event at every step.
ChannelSet stochastic_channels(const PopulationState& state, const TransportModel& model);

/// Per-face outflow through non-reflecting faces [neutrons/time].
using FaceFlux = std::array<double, 6>;

/// Deterministic streaming part of the drift; optionally tallies leakage.
Eigen::VectorXd streaming_drift(const PopulationState& state, const TransportModel& model,
                                FaceFlux* leakage = nullptr);

/// mu_i, per packet rate of change [neutrons/time].
Eigen::VectorXd drift_vector(const PopulationState& state, const TransportModel& model);

/// C, (packets x channels), in the order of stochastic_channels().
Eigen::MatrixXd noise_amplitudes(const PopulationState& state, const TransportModel& model);

/// V assembled channel by channel as sum_j p_j lambda_j lambda_j^T.
Eigen::MatrixXd drift_covariance(const PopulationState& state, const TransportModel& model);

}  // namespace ntsde

#endif  // NTSDE_CHANGES_HPP
