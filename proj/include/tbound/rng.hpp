#pragma once

#include <cstdint>

namespace tbound {

/// xoshiro256** generator seeded through SplitMix64. Substreams are derived
/// from (seed, key1, key2) by hashing, so the draws of a trial depend only on
/// its index and never on how trials are split across workers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream for trial `index` of group `group` under `seed`.
  static Rng substream(std::uint64_t seed, std::uint64_t group, std::uint64_t index);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Gamma(shape, scale 1) by Marsaglia-Tsang squeeze/rejection.
  double gamma(double shape);
  /// Beta(a, b) as G1 / (G1 + G2).
  double beta(double a, double b);

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace tbound
