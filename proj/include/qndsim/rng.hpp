#pragma once

#include <cstdint>
#include <random>

namespace qndsim {

/// Mixes a 64-bit value (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t value);

/// Source of standard normal deviates.
///
/// Each trajectory of an ensemble owns one source derived from
/// (master_seed, index), so results do not depend on the order in which
/// trajectories are executed.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed);

  static NormalSource substream(std::uint64_t master_seed, std::uint64_t index);

  double operator()();

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace qndsim
