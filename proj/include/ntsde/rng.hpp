// Random number plumbing shared by the samplers and solvers.
//
// Everything here is built on the SplitMix64 output function. Because a
// SplitMix64 stream is just mix64(seed + k * golden), the k-th value can be
// produced directly from (seed, k), which makes the generator counter-based:
// a draw keyed by (path, step, bin, channel) is reproducible regardless of
// the order in which bins are visited.
#ifndef NTSDE_RNG_HPP
#define NTSDE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ntsde {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for `index` under `parent`. Children of one parent never
/// depend on how many siblings exist, so extending an ensemble leaves the
/// existing paths untouched.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  return mix64(mix64(parent ^ 0x6a09e667f3bcc909ULL) + kGoldenGamma * (index + 1));
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// k-th uniform of the stream keyed by `key`, in (0, 1].
constexpr double uniform_at(std::uint64_t key, std::uint64_t k) {
  return 1.0 - to_unit(mix64(key + kGoldenGamma * (k + 1)));
}

/// k-th standard normal of the stream keyed by `key` (Box-Muller on the
/// uniforms 2k and 2k+1, cosine branch).
inline double normal_at(std::uint64_t key, std::uint64_t k) {
  const double u1 = uniform_at(key, 2 * k);
  const double u2 = uniform_at(key, 2 * k + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  /// Uniform in [0, 1).
  double uniform() { return to_unit(next()); }

 private:
  std::uint64_t state_;
};

/// Sequential standard normals from one SplitMix64 stream. Both Box-Muller
/// outputs are used.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - rng_.uniform();
    const double u2 = rng_.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  SplitMix64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ntsde

#endif  // NTSDE_RNG_HPP
