#pragma once

#include <cstdint>
#include <random>

namespace bandcov {

// Mixes a master seed and a stream index into an independent 64-bit seed
// (two rounds of the SplitMix64 finalizer). Used for every per-split and
// per-replication stream so results do not depend on execution order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// Inverse of the standard normal CDF (Wichura's AS241, ~1e-16 relative
// accuracy). Only rational arithmetic, sqrt and log are used.
double standard_normal_quantile(double u);

// Seeded generator with a fully specified output sequence:
//   raw words       std::mt19937_64 (sequence fixed by the C++ standard)
//   uniform()       ((word >> 11) + 0.5) * 2^-53, strictly inside (0, 1)
//   below(m)        rejection sampling on raw words, unbiased
//   normal()        standard_normal_quantile(uniform())
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();
  std::uint64_t below(std::uint64_t bound);
  double normal() { return standard_normal_quantile(uniform()); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bandcov
